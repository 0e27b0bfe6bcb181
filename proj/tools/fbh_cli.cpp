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

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fbh/fbh.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kTwoPi = 6.283185307179586;

struct Failure {
    fbh_status status;
    std::string message;
};

struct Options {
    std::string config;
    std::string preset;
    std::optional<uint64_t> seed;
    std::string out = "out";
    int threads = 1;
    std::vector<std::string> sets;
    bool plot = false;
};

struct ConfigHandle {
    fbh_config *h = nullptr;
    ~ConfigHandle() { fbh_config_free(h); }
};

void check(fbh_status st) {
    if (st != FBH_OK) {
        throw Failure{st, fbh_last_error()};
    }
}

void config_failure(const std::string &msg) { throw Failure{FBH_ERR_CONFIG, msg}; }

int exit_code(fbh_status st) {
    switch (st) {
        case FBH_OK:
            return 0;
        case FBH_ERR_CONFIG:
        case FBH_ERR_INVALID_ARGUMENT:
        case FBH_ERR_IO:
            return 2;
        default:
            return 3;
    }
}

uint64_t fnv1a_file(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); i++) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

class Run {
   public:
    Run(std::string scenario, const Options &opt) : scenario_(std::move(scenario)), opt_(opt) {}

    fbh_config *config() {
        if (cfg_.h) {
            return cfg_.h;
        }
        check(fbh_config_new(opt_.preset.empty() ? nullptr : opt_.preset.c_str(), &cfg_.h));
        if (!opt_.config.empty()) {
            check(fbh_config_load(cfg_.h, opt_.config.c_str()));
        }
        for (const std::string &s : opt_.sets) {
            check(fbh_config_set(cfg_.h, s.c_str()));
        }
        check(fbh_config_validate(cfg_.h));
        fs::create_directories(opt_.out);
        fs::remove(fs::path(opt_.out) / "error.json");
        std::string path = file("config.ini");
        check(fbh_config_dump(cfg_.h, path.c_str()));
        return cfg_.h;
    }

    uint64_t seed() {
        if (!opt_.seed) {
            config_failure("scenario '" + scenario_ + "' is stochastic and requires --seed");
        }
        return *opt_.seed;
    }

    // Registers an output file and returns its path.
    std::string file(const std::string &name) {
        files_.push_back(name);
        return (fs::path(opt_.out) / name).string();
    }

    int threads() const { return opt_.threads; }
    const Options &options() const { return opt_; }

    void write_manifest(const json &summary) {
        char hash[17] = {0};
        check(fbh_config_hash(config(), hash, sizeof(hash)));
        json m;
        m["scenario"] = scenario_;
        m["version"] = fbh_version();
        m["config_hash"] = hash;
        m["seed"] = opt_.seed ? json(*opt_.seed) : json(nullptr);
        m["preset"] = opt_.preset.empty() ? json(nullptr) : json(opt_.preset);
        m["config_file"] = opt_.config.empty() ? json(nullptr) : json(opt_.config);
        m["overrides"] = opt_.sets;
        json files = json::array();
        for (const std::string &f : files_) {
            fs::path p = fs::path(opt_.out) / f;
            files.push_back({{"path", f}, {"bytes", fs::file_size(p)}, {"fnv1a64", hex64(fnv1a_file(p))}});
        }
        m["files"] = files;
        m["summary"] = summary;
        std::ofstream out(fs::path(opt_.out) / "manifest.json");
        out << m.dump(2) << '\n';
    }

   private:
    std::string scenario_;
    Options opt_;
    ConfigHandle cfg_;
    std::vector<std::string> files_;
};

double ghz(double omega) { return omega / (kTwoPi * 1e9); }

json run_phase_scan(Run &run) {
    fbh_phase_scan_summary s{};
    std::string csv = run.file("phase_scan.csv");
    check(fbh_phase_scan(run.config(), csv.c_str(), &s));
    std::printf("optimal phase %.6f rad\n", s.optimal_phase);
    std::printf("relative transmission up_up : up_down : down_up : down_down = 1 : %.3g : %.3g : %.3g\n", s.ratios[1],
                s.ratios[2], s.ratios[3]);
    if (run.options().plot) {
        std::ifstream in(csv);
        std::string line;
        std::getline(in, line);
        std::map<std::string, std::vector<std::pair<double, double>>> curves;
        double ymax = 0;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string phase, state, mean;
            std::getline(ss, phase, ',');
            std::getline(ss, state, ',');
            std::getline(ss, mean, ',');
            double y = std::stod(mean);
            curves[state].push_back({std::stod(phase), y});
            ymax = std::max(ymax, y);
        }
        std::ofstream svg(run.file("phase_scan.svg"));
        const double w = 640, h = 400, pad = 40;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
        svg << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w - 2 * pad << "\" height=\"" << h - 2 * pad
            << "\" fill=\"none\" stroke=\"black\"/>\n";
        const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
        int ci = 0;
        for (const auto &[state, pts] : curves) {
            svg << "<polyline fill=\"none\" stroke=\"" << colors[ci % 4] << "\" points=\"";
            for (const auto &[x, y] : pts) {
                svg << pad + (w - 2 * pad) * x / kTwoPi << ',' << h - pad - (h - 2 * pad) * y / ymax << ' ';
            }
            svg << "\"/>\n<text x=\"" << w - pad - 90 << "\" y=\"" << pad + 16 * (ci + 1) << "\" fill=\""
                << colors[ci % 4] << "\" font-size=\"12\">" << state << "</text>\n";
            ci++;
        }
        svg << "<text x=\"" << w / 2 - 60 << "\" y=\"" << h - 10 << "\" font-size=\"12\">interferometer phase (rad)</text>\n";
        svg << "</svg>\n";
    }
    return {{"optimal_phase_rad", s.optimal_phase},
            {"ratios", {s.ratios[0], s.ratios[1], s.ratios[2], s.ratios[3]}}};
}

json run_error_budget(Run &run) {
    fbh_budget_summary s{};
    std::string csv = run.file("error_budget.csv");
    check(fbh_error_budget(run.config(), run.threads(), csv.c_str(), &s));
    std::printf("predicted fidelity %.4f (min %.4f, max %.4f)\n", s.fidelity_mean, s.fidelity_min, s.fidelity_max);
    json rows = json::object();
    for (size_t k = 0; k < 8; k++) {
        std::printf("  %-12s %6.2f %% (std %.2f %%)\n", fbh_error_source_name(k), 100 * s.marginal[k],
                    100 * s.marginal_std[k]);
        rows[fbh_error_source_name(k)] = s.marginal[k];
    }
    std::printf("total expected %.2f %%, sum of rows %.2f %%\n", 100 * s.total_expected, 100 * s.sum_of_rows);
    if (s.warnings > 0) {
        std::printf("%zu model-consistency warning(s): negative marginal errors, see error_budget.csv\n", s.warnings);
    }
    return {{"fidelity_mean", s.fidelity_mean},   {"fidelity_min", s.fidelity_min},
            {"fidelity_max", s.fidelity_max},     {"total_expected", s.total_expected},
            {"sum_of_rows", s.sum_of_rows},       {"marginal", rows},
            {"warnings", s.warnings}};
}

json simulation_json(const fbh_simulation_summary &s) {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return {{"trials", s.trials},
            {"heralds", s.heralds},
            {"postselected_heralds", s.postselected},
            {"herald_probability", s.herald_probability},
            {"herald_rate_hz", s.herald_rate},
            {"fidelity", num(s.fidelity)},
            {"fidelity_stderr", num(s.fidelity_stderr)},
            {"concurrence_bound", num(s.concurrence_bound)}};
}

void print_simulation(const fbh_simulation_summary &s) {
    std::printf("trials %llu, heralds %llu (%llu after post-selection)\n", (unsigned long long)s.trials,
                (unsigned long long)s.heralds, (unsigned long long)s.postselected);
    std::printf("herald probability %.3g per attempt, rate %.3g Hz\n", s.herald_probability, s.herald_rate);
    if (std::isfinite(s.fidelity)) {
        std::printf("heralded fidelity %.3f +- %.3f, concurrence >= %.3f\n", s.fidelity, s.fidelity_stderr,
                    s.concurrence_bound);
    } else {
        std::printf("heralded fidelity unavailable: a basis has no heralded trials\n");
    }
}

json run_simulate(Run &run, const std::string &mode) {
    uint64_t seed = run.seed();
    if (mode == "jump") {
        std::string csv = run.file("jump_trace.csv");
        check(fbh_jump_trace(run.config(), seed, csv.c_str()));
        std::printf("wrote %s\n", csv.c_str());
        return {{"mode", "jump"}};
    }
    fbh_simulation_summary s{};
    std::string trials = run.file("trials.csv");
    std::string corr = run.file("correlations_simulated.csv");
    check(fbh_simulate(run.config(), seed, run.threads(), trials.c_str(), corr.c_str(), &s));
    print_simulation(s);
    json j = simulation_json(s);
    j["mode"] = "experiment";
    return j;
}

json run_correlations(Run &run) {
    fbh_fidelity_summary m{};
    std::string model_csv = run.file("correlations_model.csv");
    check(fbh_predicted_correlations(run.config(), run.threads(), model_csv.c_str(), &m));
    std::printf("model: fidelity %.4f, concurrence >= %.3f\n", m.fidelity, m.concurrence_bound);
    json j = {{"model", {{"fidelity", m.fidelity}, {"concurrence_bound", m.concurrence_bound}}}};
    if (run.options().seed) {
        fbh_simulation_summary s{};
        std::string trials = run.file("trials.csv");
        std::string corr = run.file("correlations_simulated.csv");
        check(fbh_simulate(run.config(), run.seed(), run.threads(), trials.c_str(), corr.c_str(), &s));
        print_simulation(s);
        j["simulated"] = simulation_json(s);
    }
    return j;
}

struct ScanArg {
    std::string path;
    fbh_preparation prep = FBH_PREP_MIXED;
    double exposure = 1;
};

fbh_preparation parse_prep(const std::string &s) {
    if (s == "mixed") return FBH_PREP_MIXED;
    if (s == "up_up") return FBH_PREP_UP_UP;
    if (s == "up_down") return FBH_PREP_UP_DOWN;
    if (s == "down_up") return FBH_PREP_DOWN_UP;
    if (s == "down_down") return FBH_PREP_DOWN_DOWN;
    config_failure("unknown preparation '" + s + "' (mixed, up_up, up_down, down_up, down_down)");
    return FBH_PREP_MIXED;
}

ScanArg parse_scan(const std::string &arg) {
    ScanArg s;
    std::stringstream ss(arg);
    std::string part;
    std::getline(ss, s.path, ':');
    if (std::getline(ss, part, ':')) {
        s.prep = parse_prep(part);
    }
    if (std::getline(ss, part, ':')) {
        try {
            s.exposure = std::stod(part);
        } catch (const std::exception &) {
            config_failure("bad exposure in --scan '" + arg + "'");
        }
    }
    return s;
}

json run_fit_scan(Run &run, const std::vector<std::string> &scan_args, const std::string &free,
                  const std::string &method) {
    fbh_config *cfg = run.config();
    std::vector<ScanArg> scans;
    for (const std::string &a : scan_args) {
        scans.push_back(parse_scan(a));
    }
    if (scans.empty()) {
        // Synthetic scan set: a broad unpolarized cavity scan and two narrow initialized scans.
        uint64_t seed = run.seed();
        struct Plan {
            const char *name;
            fbh_preparation prep;
            double lo, hi;
            size_t n;
            double exposure;
        };
        const Plan plans[] = {
            {"scan_broad.csv", FBH_PREP_MIXED, -40, 30, 401, 1},
            {"scan_up_down.csv", FBH_PREP_UP_DOWN, -17, -5, 1201, 10},
            {"scan_down_up.csv", FBH_PREP_DOWN_UP, -17, -5, 1201, 10},
        };
        for (const Plan &p : plans) {
            std::string path = run.file(p.name);
            check(fbh_synthetic_scan(cfg, seed, p.prep, p.lo * 1e9, p.hi * 1e9, p.n, p.exposure, path.c_str()));
            scans.push_back({path, p.prep, p.exposure});
        }
    }
    std::vector<const char *> paths;
    std::vector<fbh_preparation> preps;
    std::vector<double> exposures;
    for (const ScanArg &s : scans) {
        paths.push_back(s.path.c_str());
        preps.push_back(s.prep);
        exposures.push_back(s.exposure);
    }
    int m = method == "lm" ? 0 : method == "nm" ? 1 : -1;
    if (m < 0) {
        config_failure("unknown fit method '" + method + "' (lm, nm)");
    }
    fbh_fit_summary s{};
    std::string report = run.file("fit_report.csv");
    fbh_status st = fbh_fit_scans(cfg, paths.data(), preps.data(), exposures.data(), paths.size(),
                                  free.empty() ? nullptr : free.c_str(), m, report.c_str(), &s);
    std::string msg = fbh_last_error();
    if (st == FBH_OK || st == FBH_ERR_NOT_CONVERGED) {
        std::printf("fit %s after %d iterations, reduced chi2 %.4f, %zu points trimmed\n",
                    s.converged ? "converged" : "did not converge", s.iterations, s.reduced_chi2, s.trimmed_points);
        std::ifstream in(report);
        std::string line;
        while (std::getline(in, line)) {
            std::printf("  %s\n", line.c_str());
        }
    }
    if (st != FBH_OK) {
        throw Failure{st, msg};
    }
    return {{"converged", s.converged != 0},
            {"iterations", s.iterations},
            {"reduced_chi2", s.reduced_chi2},
            {"residual_norm", s.residual_norm},
            {"gradient_norm", s.gradient_norm},
            {"trimmed_points", s.trimmed_points}};
}

json run_detuning_design(Run &run, double contrast) {
    fbh_config *cfg = run.config();
    std::string csv = run.file("detuning_design.csv");
    std::ofstream out(csv);
    out << "emitter,cooperativity,delta_a_ghz,delta_c_ghz,delta_ghz,delta_approx_ghz,contrast,bandwidth_ghz\n";
    json j = json::object();
    for (int e = 0; e < 2; e++) {
        fbh_detuning_design d{};
        check(fbh_design_detuning(cfg, e, contrast, &d));
        const char *name = e == 0 ? "a" : "b";
        char line[512];
        std::snprintf(line, sizeof(line), "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", name, d.cooperativity,
                      ghz(d.delta_a), ghz(d.delta_c), ghz(d.delta), ghz(d.delta_approx), contrast, ghz(d.bandwidth));
        out << line;
        std::printf("emitter %s: C = %.3f, delta_a = %.3f GHz, delta_c = %.3f GHz, delta = %.3f GHz (approx %.3f), "
                    "|delta_c| <= %.3f GHz for contrast %g\n",
                    name, d.cooperativity, ghz(d.delta_a), ghz(d.delta_c), ghz(d.delta), ghz(d.delta_approx),
                    ghz(d.bandwidth), contrast);
        j[name] = {{"cooperativity", d.cooperativity}, {"delta_ghz", ghz(d.delta)}, {"bandwidth_ghz", ghz(d.bandwidth)}};
    }
    return j;
}

void write_error_record(const Options &opt, const std::string &scenario, const Failure &f) {
    json e = {{"scenario", scenario},
              {"status", fbh_status_name(f.status)},
              {"code", int(f.status)},
              {"exit_code", exit_code(f.status)},
              {"message", f.message}};
    std::error_code ec;
    fs::create_directories(opt.out, ec);
    std::ofstream out(fs::path(opt.out) / "error.json");
    out << e.dump(2) << '\n';
    std::cerr << e.dump() << '\n';
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Frequency-bin heralded entanglement simulator"};
    app.set_version_flag("--version", std::string(fbh_version()));
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    uint64_t seed = 0;
    std::string presets;
    for (size_t i = 0; i < fbh_preset_count(); i++) {
        presets += (i ? ", " : "") + std::string(fbh_preset_name(i));
    }
    app.add_option("--config", opt.config, "Configuration file (key = value unit)");
    app.add_option("--preset", opt.preset, "Base preset (default paper_tableS1 without --config): " + presets);
    auto *seed_opt = app.add_option("--seed", seed, "Seed for stochastic scenarios");
    app.add_option("--out", opt.out, "Output directory")->capture_default_str();
    app.add_option("--threads", opt.threads, "Worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
    app.add_option("--set", opt.sets, "Override key=value (repeatable)");
    app.add_flag("--plot", opt.plot, "Also write SVG plots where available");

    auto *phase = app.add_subcommand("phase-scan", "Four-state heralding-port transmission versus interferometer phase");
    auto *budget = app.add_subcommand("error-budget", "Marginal error budget of the heralded state");
    auto *corr = app.add_subcommand("correlations", "Predicted (and, with --seed, simulated) correlation bars");
    auto *sim = app.add_subcommand("simulate", "Monte Carlo of the heralded protocol or a quantum-jump trace");
    std::string mode = "experiment";
    sim->add_option("--mode", mode, "experiment or jump")->check(CLI::IsMember({"experiment", "jump"}))->capture_default_str();
    auto *fit = app.add_subcommand("fit-scan", "Fit reflection scans to the cavity QED model");
    std::vector<std::string> scans;
    std::string free, method = "lm";
    fit->add_option("--scan", scans, "Scan CSV as PATH[:PREPARATION[:EXPOSURE]] (repeatable)");
    fit->add_option("--free", free, "Comma-separated free parameters");
    fit->add_option("--method", method, "lm or nm")->capture_default_str();
    auto *design = app.add_subcommand("detuning-design", "Optimal detunings and contrast bandwidth");
    double contrast = 10;
    design->add_option("--contrast", contrast, "Target contrast")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (*seed_opt) {
        opt.seed = seed;
    }
    if (opt.preset.empty() && opt.config.empty()) {
        opt.preset = "paper_tableS1";
    }
    std::string scenario = app.get_subcommands().front()->get_name();
    Run run(scenario, opt);
    try {
        json summary;
        if (*phase) {
            summary = run_phase_scan(run);
        } else if (*budget) {
            summary = run_error_budget(run);
        } else if (*corr) {
            summary = run_correlations(run);
        } else if (*sim) {
            summary = run_simulate(run, mode);
        } else if (*fit) {
            summary = run_fit_scan(run, scans, free, method);
        } else if (*design) {
            summary = run_detuning_design(run, contrast);
        }
        run.write_manifest(summary);
    } catch (const Failure &f) {
        write_error_record(opt, scenario, f);
        return exit_code(f.status);
    } catch (const std::exception &e) {
        write_error_record(opt, scenario, {FBH_ERR_IO, e.what()});
        return 2;
    }
    return 0;
}
