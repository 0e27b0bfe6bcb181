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

#include "fbh/model.hpp"

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <functional>

#include "fbh/csv.hpp"
#include "fbh/errors.hpp"
#include "fbh/parallel.hpp"
#include "fbh/quadrature.hpp"
#include "fbh/units.hpp"

namespace fbh {

namespace {

// Grid scan followed by Brent refinement inside the best grid cell.
double argmin_periodic(const std::function<double(double)> &f, int n) {
    double h = kTwoPi / n;
    int best = 0;
    double best_v = INFINITY;
    for (int i = 0; i < n; i++) {
        double v = f(i * h);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    auto r = boost::math::tools::brent_find_minima(f, (best - 1) * h, (best + 1) * h, 40);
    return r.second <= best_v ? r.first : best * h;
}

double argmin_interval(const std::function<double(double)> &f, double lo, double hi, int n) {
    double h = (hi - lo) / (n - 1);
    int best = 0;
    double best_v = INFINITY;
    for (int i = 0; i < n; i++) {
        double v = f(lo + i * h);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    double a = lo + std::max(0, best - 1) * h;
    double b = lo + std::min(n - 1, best + 1) * h;
    auto r = boost::math::tools::brent_find_minima(f, a, b, 40);
    return r.second <= best_v ? r.first : lo + best * h;
}

CqedSystem drifted(const FidelityModel &m) {
    CqedSystem s = m.system;
    s.a.omega_up += m.drift_a;
    s.a.omega_down += m.drift_a;
    return s;
}

double mean_t2(const std::vector<ReflectionSet> &ens, const SidebandConfig &cfg, double dphi, int k) {
    double acc = 0;
    for (const ReflectionSet &r : ens) {
        acc += r.weight * std::norm(r.transmission(cfg, dphi)[k]);
    }
    return acc;
}

double calibrate_on(const CqedSystem &system, SidebandConfig cfg, int order) {
    cfg.phi_c = 0;
    return dark_port_phase(system, cfg, order);
}

Matrix4c kernel_at(const std::vector<ReflectionSet> &ens, const SidebandConfig &cfg, double dphi) {
    Matrix4c k = Matrix4c::Zero();
    for (const ReflectionSet &r : ens) {
        TransmissionMap t = r.transmission(cfg, dphi);
        Vector4c v(t[0], t[1], t[2], t[3]);
        k += r.weight * v * v.adjoint();
    }
    return k;
}

struct HeraldedFidelity {
    double fidelity;
    CorrelationData correlations;
    TwoQubitState state;
};

HeraldedFidelity fidelity_from_kernel(const FidelityModel &m, const Matrix4c &kernel) {
    TwoQubitState init = TwoQubitState::basis({Spin::up, Spin::down});
    EchoSequence seq{m.timing, Basis::ZZ};
    TwoQubitState mid = EchoRunner(seq, m.noise).before_probe(init);
    HeraldedState h = heralded_projection_kernel(mid, kernel);
    TwoQubitState heralded = two_photon_dephasing(h.state, m.n_mean);
    CorrelationData data;
    for (Basis b : {Basis::XX, Basis::YY, Basis::ZZ}) {
        EchoSequence s{m.timing, b};
        TwoQubitState fin = EchoRunner(s, m.noise).after_probe(heralded);
        data.set(b, sequence_correlations(fin, s));
    }
    return {bell_fidelity(data).value, data, heralded};
}

}  // namespace

const char *error_source_name(ErrorSource s) {
    switch (s) {
        case ErrorSource::decoherence:
            return "decoherence";
        case ErrorSource::microwave:
            return "microwave";
        case ErrorSource::two_photon:
            return "two_photon";
        case ErrorSource::detuning:
            return "detuning";
        case ErrorSource::phase:
            return "phase";
        case ErrorSource::carrier:
            return "carrier";
        case ErrorSource::diffusion:
            return "diffusion";
        case ErrorSource::contrast:
            return "contrast";
    }
    return "?";
}

const char *error_source_label(ErrorSource s) {
    switch (s) {
        case ErrorSource::decoherence:
            return "Decoherence";
        case ErrorSource::microwave:
            return "MW pulse errors";
        case ErrorSource::two_photon:
            return "2-photon events";
        case ErrorSource::detuning:
            return "Systematic detuning";
        case ErrorSource::phase:
            return "Interferometer phase";
        case ErrorSource::carrier:
            return "Carrier leakage";
        case ErrorSource::diffusion:
            return "Spectral diffusion";
        case ErrorSource::contrast:
            return "SiV contrast";
    }
    return "?";
}

ErrorSource parse_error_source(const std::string &name) {
    for (ErrorSource s : kAllErrorSources) {
        if (name == error_source_name(s)) {
            return s;
        }
    }
    domain_error("unknown error source: " + name);
}

void FidelityModel::validate() const {
    system.validate();
    sidebands.validate();
    timing.validate();
    if (!(n_mean >= 0)) {
        domain_error("model.n_mean must be >= 0");
    }
    if (diffusion_order < 1 || mw_phases < 1) {
        domain_error("model: diffusion_order and mw_phases must be >= 1");
    }
    if (!std::isfinite(drift_a)) {
        domain_error("model.drift_a must be finite");
    }
}

Toggles Toggles::with(ErrorSource s) const {
    Toggles t = *this;
    t.eliminated[static_cast<int>(s)] = true;
    return t;
}

Toggles Toggles::all_but_contrast() {
    Toggles t;
    for (ErrorSource s : kAllErrorSources) {
        if (s != ErrorSource::contrast) {
            t = t.with(s);
        }
    }
    return t;
}

double dark_port_phase(const CqedSystem &system, const SidebandConfig &cfg, int order) {
    std::vector<ReflectionSet> ens = reflection_ensemble(cfg, system, order);
    int uu = SpinConfig{Spin::up, Spin::up}.index();
    double d = argmin_periodic([&](double d) { return mean_t2(ens, cfg, d, uu); }, 181);
    d = std::fmod(d, kTwoPi);
    return d < 0 ? d + kTwoPi : d;
}

double calibrate_phase(const FidelityModel &model) {
    return calibrate_on(model.system, model.sidebands, model.diffusion_order);
}

SidebandConfig max_contrast_sidebands(const FidelityModel &model) {
    CqedSystem sys = drifted(model);
    DiffusionGrid grid = diffusion_grid(sys.a.sigma, sys.b.sigma, model.diffusion_order);
    auto dark_t2 = [&](double w, SpinConfig s) {
        double acc = 0;
        for (size_t n = 0; n < grid.size(); n++) {
            acc += grid.weight[n] * std::norm(sys.reflection(w, s, grid.offset_a[n], grid.offset_b[n]));
        }
        return acc;
    };
    auto search = [&](const EmitterParams &e, SpinConfig dark) {
        double dir = e.omega_down > e.omega_up ? 1.0 : -1.0;
        double a = e.omega_down - dir * ghz(2.5);
        double b = e.omega_down + dir * ghz(0.5);
        double lo = std::min(a, b), hi = std::max(a, b);
        return argmin_interval([&](double w) { return dark_t2(w, dark); }, lo, hi, 301);
    };
    double wa = search(sys.a, {Spin::down, Spin::up});
    double wb = search(sys.b, {Spin::up, Spin::down});
    SidebandConfig cfg = model.sidebands;
    cfg.omega_carrier = 0.5 * (wa + wb);
    cfg.omega_mw = 0.5 * std::abs(wb - wa);
    return cfg;
}

Prediction predict(const FidelityModel &model, double mw_phase_b, const Toggles &toggles) {
    FidelityModel m = model;
    m.noise.mw_phase_b = mw_phase_b;
    if (toggles[ErrorSource::decoherence]) {
        m.noise.dephasing_a = m.noise.dephasing_b = 0;
    }
    if (toggles[ErrorSource::microwave]) {
        m.noise.a = QubitErrors{};
        m.noise.b = QubitErrors{};
        m.noise.crosstalk.enabled = false;
    }
    if (toggles[ErrorSource::two_photon]) {
        m.n_mean = 0;
    }
    if (toggles[ErrorSource::carrier]) {
        m.sidebands.c_carrier = 0;
    }
    if (toggles[ErrorSource::diffusion]) {
        m.system.a.sigma = m.system.b.sigma = 0;
    }
    CqedSystem run = drifted(m);
    double dphi;
    if (toggles[ErrorSource::detuning]) {
        m.sidebands = max_contrast_sidebands(m);
        dphi = calibrate_on(run, m.sidebands, m.diffusion_order);
    } else {
        dphi = calibrate_phase(m);
    }
    std::vector<ReflectionSet> ens = reflection_ensemble(m.sidebands, run, m.diffusion_order);
    if (toggles[ErrorSource::phase]) {
        dphi = argmin_periodic(
            [&](double d) { return -fidelity_from_kernel(m, kernel_at(ens, m.sidebands, d)).fidelity; }, 72);
    }
    HeraldedFidelity hf = fidelity_from_kernel(m, kernel_at(ens, m.sidebands, dphi));
    return {hf.fidelity, dphi, hf.correlations, hf.state};
}

ErrorBudget error_budget(const FidelityModel &model, std::span<const ErrorSource> sources, int threads) {
    model.validate();
    int n = model.mw_phases;
    std::vector<double> base(n);
    std::vector<std::vector<double>> marg(sources.size(), std::vector<double>(n));
    parallel_for(size_t(n), threads, [&](size_t k) {
        double phase = kTwoPi * double(k) / n;
        base[k] = predict(model, phase).fidelity;
        for (size_t j = 0; j < sources.size(); j++) {
            ErrorSource s = sources[j];
            if (s == ErrorSource::contrast) {
                marg[j][k] = 1 - predict(model, phase, Toggles::all_but_contrast()).fidelity;
            } else {
                marg[j][k] = predict(model, phase, Toggles{}.with(s)).fidelity - base[k];
            }
        }
    });
    auto stats = [](const std::vector<double> &v, double &mean, double &lo, double &hi, double &sd) {
        mean = 0;
        lo = INFINITY;
        hi = -INFINITY;
        for (double x : v) {
            mean += x;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        mean /= double(v.size());
        double ss = 0;
        for (double x : v) {
            ss += (x - mean) * (x - mean);
        }
        sd = std::sqrt(ss / double(v.size()));
    };
    ErrorBudget b;
    double sd;
    stats(base, b.fidelity_mean, b.fidelity_min, b.fidelity_max, sd);
    b.fidelity_per_phase = base;
    b.total_expected = 1 - b.fidelity_mean;
    for (size_t j = 0; j < sources.size(); j++) {
        BudgetRow row{sources[j], 0, 0, 0, 0};
        stats(marg[j], row.mean, row.min, row.max, row.stddev);
        if (sources[j] != ErrorSource::contrast && row.min < -1e-9) {
            b.warnings.push_back(std::string("eliminating ") + error_source_name(sources[j]) +
                                 " lowers the predicted fidelity by up to " + format_double(-row.min));
        }
        b.sum_of_rows += row.mean;
        b.rows.push_back(row);
    }
    return b;
}

void write_error_budget_csv(std::ostream &out, const ErrorBudget &b) {
    out << "source,label,marginal_mean,marginal_min,marginal_max,marginal_std\n";
    for (const BudgetRow &r : b.rows) {
        out << error_source_name(r.source) << ',' << error_source_label(r.source) << ',' << format_double(r.mean)
            << ',' << format_double(r.min) << ',' << format_double(r.max) << ',' << format_double(r.stddev)
            << '\n';
    }
    out << "sum_of_rows,Sum of rows," << format_double(b.sum_of_rows) << ",,,\n";
    out << "total_expected,Total expected," << format_double(b.total_expected) << ','
        << format_double(1 - b.fidelity_max) << ',' << format_double(1 - b.fidelity_min) << ",\n";
}

std::array<double, 4> transmission_ratios(const FidelityModel &model) {
    SidebandConfig cfg = model.sidebands;
    cfg.phi_c = 0;
    double dphi = calibrate_on(model.system, cfg, model.diffusion_order);
    std::vector<ReflectionSet> ens = reflection_ensemble(cfg, model.system, model.diffusion_order);
    std::array<double, 4> t2;
    for (int k = 0; k < 4; k++) {
        t2[k] = mean_t2(ens, cfg, dphi, k);
    }
    std::array<double, 4> r;
    for (int k = 0; k < 4; k++) {
        r[k] = t2[k] / t2[0];
    }
    return r;
}

}  // namespace fbh
