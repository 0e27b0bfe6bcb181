// Copyright 2026 The fbh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fbh/fbh.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fbh/config.hpp"
#include "fbh/csv.hpp"
#include "fbh/parallel.hpp"
#include "fbh/rng.hpp"
#include "fbh/units.hpp"

#ifndef FBH_VERSION
#define FBH_VERSION "0.0.0"
#endif

struct fbh_config {
    fbh::Config cfg;
};

namespace {

thread_local std::string last_error;

fbh_status status_of(fbh::ErrorCode code) {
    switch (code) {
        case fbh::ErrorCode::ok:
            return FBH_OK;
        case fbh::ErrorCode::domain:
            return FBH_ERR_DOMAIN;
        case fbh::ErrorCode::contract:
            return FBH_ERR_CONTRACT;
        case fbh::ErrorCode::herald_impossible:
            return FBH_ERR_HERALD_IMPOSSIBLE;
        case fbh::ErrorCode::not_converged:
            return FBH_ERR_NOT_CONVERGED;
        case fbh::ErrorCode::rank_deficient:
            return FBH_ERR_RANK_DEFICIENT;
        case fbh::ErrorCode::config:
            return FBH_ERR_CONFIG;
        case fbh::ErrorCode::io:
            return FBH_ERR_IO;
    }
    return FBH_ERR_INTERNAL;
}

template <class F>
fbh_status guarded(F &&f) {
    last_error.clear();
    try {
        f();
        return FBH_OK;
    } catch (const fbh::Error &e) {
        last_error = e.what();
        return status_of(e.code());
    } catch (const std::invalid_argument &e) {
        last_error = e.what();
        return FBH_ERR_INVALID_ARGUMENT;
    } catch (const std::exception &e) {
        last_error = e.what();
        return FBH_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown exception";
        return FBH_ERR_INTERNAL;
    }
}

void require(bool ok, const char *what) {
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

std::ofstream open_out(const char *path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw fbh::Error(fbh::ErrorCode::io, std::string("cannot write '") + path + "'");
    }
    return out;
}

void close_out(std::ofstream &out, const char *path) {
    out.close();
    if (!out) {
        throw fbh::Error(fbh::ErrorCode::io, std::string("write failed for '") + path + "'");
    }
}

fbh::Preparation preparation(fbh_preparation p) {
    using fbh::Spin;
    switch (p) {
        case FBH_PREP_MIXED:
            return fbh::Preparation::mixed();
        case FBH_PREP_UP_UP:
            return fbh::Preparation::spins({Spin::up, Spin::up});
        case FBH_PREP_UP_DOWN:
            return fbh::Preparation::spins({Spin::up, Spin::down});
        case FBH_PREP_DOWN_UP:
            return fbh::Preparation::spins({Spin::down, Spin::up});
        case FBH_PREP_DOWN_DOWN:
            return fbh::Preparation::spins({Spin::down, Spin::down});
    }
    throw std::invalid_argument("unknown preparation");
}

void write_correlation_rows(std::ostream &out, const char *source, const fbh::CorrelationData &c) {
    for (fbh::Basis b : {fbh::Basis::XX, fbh::Basis::YY, fbh::Basis::ZZ}) {
        const fbh::BasisCorrelation &bc = c[b];
        for (int k = 0; k < 4; k++) {
            out << source << ',' << fbh::basis_name(b) << ',' << fbh::SpinConfig::from_index(k).label() << ','
                << fbh::format_double(bc.p[k]) << ',' << fbh::format_double(bc.shots > 0 ? bc.binomial_error(k) : 0)
                << ',' << fbh::format_double(bc.shots) << '\n';
        }
    }
}

const char *kCorrelationHeader = "source,basis,outcome,probability,stderr,shots\n";

bool complete(const fbh::CorrelationData &c) {
    return c[fbh::Basis::XX].present && c[fbh::Basis::YY].present && c[fbh::Basis::ZZ].present;
}

}  // namespace

extern "C" {

const char *fbh_version(void) { return FBH_VERSION; }

const char *fbh_status_name(fbh_status status) {
    switch (status) {
        case FBH_OK:
            return "ok";
        case FBH_ERR_DOMAIN:
            return "domain";
        case FBH_ERR_CONTRACT:
            return "contract";
        case FBH_ERR_HERALD_IMPOSSIBLE:
            return "herald_impossible";
        case FBH_ERR_NOT_CONVERGED:
            return "not_converged";
        case FBH_ERR_RANK_DEFICIENT:
            return "rank_deficient";
        case FBH_ERR_CONFIG:
            return "config";
        case FBH_ERR_IO:
            return "io";
        case FBH_ERR_INVALID_ARGUMENT:
            return "invalid_argument";
        case FBH_ERR_INTERNAL:
            return "internal";
    }
    return "unknown";
}

const char *fbh_last_error(void) { return last_error.c_str(); }

size_t fbh_preset_count(void) { return fbh::preset_names().size(); }

const char *fbh_preset_name(size_t index) {
    const auto &names = fbh::preset_names();
    return index < names.size() ? names[index].c_str() : nullptr;
}

fbh_status fbh_config_new(const char *preset, fbh_config **out) {
    last_error.clear();
    if (!out) {
        last_error = "null output handle";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&] {
        auto h = std::make_unique<fbh_config>();
        if (preset) {
            h->cfg = fbh::preset(preset);
        }
        *out = h.release();
    });
}

fbh_status fbh_config_clone(const fbh_config *cfg, fbh_config **out) {
    if (!cfg || !out) {
        last_error = "null handle";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] { *out = new fbh_config(*cfg); });
}

void fbh_config_free(fbh_config *cfg) { delete cfg; }

fbh_status fbh_config_load(fbh_config *cfg, const char *path) {
    if (!cfg || !path) {
        last_error = "null argument";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] { cfg->cfg = fbh::load_config(path, cfg->cfg); });
}

fbh_status fbh_config_set(fbh_config *cfg, const char *assignment) {
    if (!cfg || !assignment) {
        last_error = "null argument";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] { fbh::apply_setting(cfg->cfg, assignment); });
}

fbh_status fbh_config_validate(const fbh_config *cfg) {
    if (!cfg) {
        last_error = "null handle";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] { cfg->cfg.validate(); });
}

fbh_status fbh_config_dump(const fbh_config *cfg, const char *path) {
    if (!cfg || !path) {
        last_error = "null argument";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        std::ofstream out = open_out(path);
        fbh::dump_config(out, cfg->cfg);
        close_out(out, path);
    });
}

fbh_status fbh_config_hash(const fbh_config *cfg, char *buf, size_t len) {
    if (!cfg || !buf || len < 17) {
        last_error = "hash buffer must hold 17 bytes";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        std::string h = fbh::config_hash(cfg->cfg);
        std::memcpy(buf, h.c_str(), h.size() + 1);
    });
}

fbh_status fbh_phase_scan(const fbh_config *cfg, const char *csv_path, fbh_phase_scan_summary *out) {
    if (!cfg || !csv_path) {
        last_error = "null argument";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const fbh::Config &c = cfg->cfg;
        c.validate();
        fbh::FidelityModel fm = c.fidelity_model();
        fbh::SidebandConfig sb = fm.sidebands;
        sb.phi_c = c.phase_scan_phi_c;
        int order = c.phase_scan_sigma_average ? c.phase_scan_order : 0;
        std::vector<double> phases(size_t(c.phase_scan_points));
        for (size_t i = 0; i < phases.size(); i++) {
            phases[i] = fbh::kTwoPi * double(i) / double(phases.size());
        }
        std::vector<fbh::SpinConfig> states(fbh::kAllSpinConfigs.begin(), fbh::kAllSpinConfigs.end());
        auto rows = fbh::phase_scan(states, phases, sb, fm.system, c.phase_scan_sigma_average, c.phase_scan_order);
        std::ofstream f = open_out(csv_path);
        fbh::write_phase_scan_csv(f, rows);
        close_out(f, csv_path);
        if (out) {
            double opt = fbh::dark_port_phase(fm.system, sb, order);
            auto at = fbh::phase_scan(states, std::vector<double>{opt}, sb, fm.system, c.phase_scan_sigma_average,
                                      c.phase_scan_order);
            out->optimal_phase = opt;
            for (const auto &r : at) {
                out->ratios[r.state.index()] = r.mean_t2 / at[0].mean_t2;
            }
        }
    });
}

const char *fbh_error_source_name(size_t index) {
    return index < fbh::kAllErrorSources.size() ? fbh::error_source_name(fbh::kAllErrorSources[index]) : nullptr;
}

fbh_status fbh_error_budget(const fbh_config *cfg, int threads, const char *csv_path, fbh_budget_summary *out) {
    if (!cfg || !csv_path) {
        last_error = "null argument";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        cfg->cfg.validate();
        fbh::ErrorBudget b = fbh::error_budget(cfg->cfg.fidelity_model(), fbh::kAllErrorSources, threads);
        std::ofstream f = open_out(csv_path);
        fbh::write_error_budget_csv(f, b);
        close_out(f, csv_path);
        if (out) {
            out->fidelity_mean = b.fidelity_mean;
            out->fidelity_min = b.fidelity_min;
            out->fidelity_max = b.fidelity_max;
            out->total_expected = b.total_expected;
            out->sum_of_rows = b.sum_of_rows;
            for (size_t k = 0; k < 8; k++) {
                out->marginal[k] = b.rows[k].mean;
                out->marginal_std[k] = b.rows[k].stddev;
            }
            out->warnings = b.warnings.size();
        }
    });
}

fbh_status fbh_predicted_correlations(const fbh_config *cfg, int threads, const char *csv_path,
                                      fbh_fidelity_summary *out) {
    if (!cfg || !csv_path) {
        last_error = "null argument";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        cfg->cfg.validate();
        fbh::FidelityModel fm = cfg->cfg.fidelity_model();
        size_t n = size_t(fm.mw_phases);
        std::vector<fbh::Prediction> preds(n, fbh::Prediction{0, 0, {}, fbh::TwoQubitState::maximally_mixed()});
        fbh::parallel_for(n, threads, [&](size_t i) { preds[i] = fbh::predict(fm, fbh::kTwoPi * double(i) / double(n)); });
        fbh::CorrelationData avg;
        double f = 0;
        for (fbh::Basis b : {fbh::Basis::XX, fbh::Basis::YY, fbh::Basis::ZZ}) {
            std::array<double, 4> p{};
            for (const auto &pr : preds) {
                for (int k = 0; k < 4; k++) {
                    p[k] += pr.correlations[b].p[k] / double(n);
                }
            }
            avg.set(b, p);
        }
        for (const auto &pr : preds) {
            f += pr.fidelity / double(n);
        }
        std::ofstream o = open_out(csv_path);
        o << kCorrelationHeader;
        write_correlation_rows(o, "model", avg);
        close_out(o, csv_path);
        if (out) {
            out->fidelity = f;
            out->fidelity_stderr = 0;
            out->concurrence_bound = fbh::concurrence_lower_bound(avg);
        }
    });
}

fbh_status fbh_simulate(const fbh_config *cfg, uint64_t seed, int threads, const char *trials_path,
                        const char *correlations_path, fbh_simulation_summary *out) {
    if (!cfg || !trials_path) {
        last_error = "null argument";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const fbh::Config &c = cfg->cfg;
        c.validate();
        fbh::ExperimentModel em = c.experiment_model();
        fbh::Dataset data = fbh::run_experiment(seed, c.trials, em, threads);
        data.config_hash = fbh::config_hash(c);
        std::ofstream f = open_out(trials_path);
        fbh::write_dataset_csv(f, data);
        close_out(f, trials_path);

        fbh::Dataset kept = c.postselect_window > 0 ? fbh::postselect(data, em.timing, c.postselect_window,
                                                                       c.postselect_max_a, c.postselect_max_b)
                                                     : data;
        fbh::CorrelationData corr = fbh::heralded_correlations(kept, em.timing);
        if (correlations_path) {
            std::ofstream o = open_out(correlations_path);
            o << kCorrelationHeader;
            write_correlation_rows(o, "simulated", corr);
            close_out(o, correlations_path);
        }
        if (out) {
            uint64_t heralds = 0, kept_heralds = 0;
            for (const auto &t : data.trials) {
                heralds += t.heralded;
            }
            for (const auto &t : kept.trials) {
                kept_heralds += t.heralded;
            }
            out->trials = data.trials.size();
            out->heralds = heralds;
            out->postselected = kept_heralds;
            out->herald_probability = fbh::herald_probability(em);
            out->herald_rate = out->herald_probability / c.protocol.rep_period;
            if (complete(corr)) {
                fbh::Estimate e = fbh::bell_fidelity(corr);
                out->fidelity = e.value;
                out->fidelity_stderr = e.stderr_;
                out->concurrence_bound = fbh::concurrence_lower_bound(corr);
            } else {
                out->fidelity = out->fidelity_stderr = out->concurrence_bound = std::nan("");
            }
        }
    });
}

fbh_status fbh_jump_trace(const fbh_config *cfg, uint64_t seed, const char *csv_path) {
    if (!cfg || !csv_path) {
        last_error = "null argument";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        cfg->cfg.validate();
        auto trace = fbh::quantum_jump_trace(seed, cfg->cfg.experiment_model(), cfg->cfg.jump);
        std::ofstream f = open_out(csv_path);
        fbh::write_jump_trace_csv(f, trace);
        close_out(f, csv_path);
    });
}

fbh_status fbh_synthetic_scan(const fbh_config *cfg, uint64_t seed, fbh_preparation prep, double start_hz,
                              double stop_hz, size_t points, double exposure, const char *csv_path) {
    if (!cfg || !csv_path) {
        last_error = "null argument";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        require(points >= 2 && stop_hz > start_hz, "scan grid needs points >= 2 and stop > start");
        cfg->cfg.validate();
        std::vector<double> freqs(points);
        for (size_t i = 0; i < points; i++) {
            freqs[i] = cfg->cfg.cavity.omega_c + fbh::hz(start_hz + (stop_hz - start_hz) * double(i) / double(points - 1));
        }
        std::mt19937_64 rng = fbh::substream(seed, fbh::StreamTag::scan_noise, uint64_t(prep));
        fbh::ScanDataset d = fbh::synthetic_scan(cfg->cfg.scan_model(), freqs, preparation(prep), rng, exposure);
        std::ofstream f = open_out(csv_path);
        f << "freq_hz,counts\n";
        for (size_t i = 0; i < points; i++) {
            f << fbh::format_double(d.freq[i] / fbh::kTwoPi) << ',' << fbh::format_double(d.counts[i]) << '\n';
        }
        close_out(f, csv_path);
    });
}

fbh_status fbh_fit_scans(const fbh_config *cfg, const char *const *paths, const fbh_preparation *preps,
                         const double *exposures, size_t count, const char *free_params, int method,
                         const char *report_path, fbh_fit_summary *out) {
    if (!cfg || !paths || !preps || !report_path || count == 0) {
        last_error = "null argument or empty scan list";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    fbh::FitResult result;
    bool have_result = false;
    fbh_status st = guarded([&] {
        const fbh::Config &c = cfg->cfg;
        c.validate();
        fbh::ScanModel model0 = c.scan_model();
        std::vector<fbh::ScanDataset> data;
        for (size_t i = 0; i < count; i++) {
            std::ifstream in(paths[i]);
            if (!in) {
                throw fbh::Error(fbh::ErrorCode::io, std::string("cannot open scan '") + paths[i] + "'");
            }
            fbh::ScanDataset d = fbh::read_scan_csv(in, preparation(preps[i]));
            d.exposure = exposures ? exposures[i] : 1.0;
            if (preps[i] == FBH_PREP_MIXED) {
                fbh::exclude_near_lines(d, model0.system, c.scan_exclude_half_width);
            }
            data.push_back(std::move(d));
        }
        fbh::FreeMask mask;
        std::string list = free_params ? free_params
                                       : "g_a,gamma_a,sigma_a,omega_a,g_b,gamma_b,sigma_b,omega_b,kappa_w,kappa_l,"
                                         "omega_c,scale,background";
        std::stringstream ss(list);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (!name.empty()) {
                mask.set(fbh::parse_fit_param(name));
            }
        }
        fbh::FitOptions opt = c.fit;
        require(method == 0 || method == 1, "method must be 0 or 1");
        opt.method = method == 0 ? fbh::FitMethod::levenberg_marquardt : fbh::FitMethod::nelder_mead;
        try {
            result = fbh::fit_scans(data, model0, mask, opt);
            have_result = true;
        } catch (const fbh::FitError &e) {
            result = e.best_so_far();
            have_result = true;
            std::ofstream f = open_out(report_path);
            fbh::write_fit_report(f, result);
            close_out(f, report_path);
            throw;
        }
        std::ofstream f = open_out(report_path);
        fbh::write_fit_report(f, result);
        close_out(f, report_path);
    });
    if (out && have_result) {
        out->converged = result.converged;
        out->iterations = result.iterations;
        out->trimmed_points = result.trimmed_points;
        out->reduced_chi2 = result.reduced_chi2;
        out->residual_norm = result.residual_norm;
        out->gradient_norm = result.gradient_norm;
    }
    return st;
}

fbh_status fbh_design_detuning(const fbh_config *cfg, int emitter, double contrast, fbh_detuning_design *out) {
    if (!cfg || !out || (emitter != 0 && emitter != 1)) {
        last_error = "null argument or emitter not 0/1";
        return FBH_ERR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const fbh::Config &c = cfg->cfg;
        const fbh::EmitterLines &e = emitter == 0 ? c.emitter_a : c.emitter_b;
        out->cooperativity = fbh::cooperativity(e.g, c.cavity.kappa_tot(), e.gamma);
        fbh::OptimalDetunings d = fbh::optimal_detunings(e.g, e.gamma, c.cavity.kappa_w, c.cavity.kappa_l);
        out->delta_a = d.delta_a;
        out->delta_c = d.delta_c;
        out->delta = d.delta;
        out->delta_approx = d.delta_approx;
        out->bandwidth = fbh::contrast_bandwidth(c.cavity.kappa_w, contrast);
    });
}

}  // extern "C"
