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


#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fbh/spectra_fit.hpp"
#include "fbh/units.hpp"

using namespace fbh;

namespace {

const double kWc = thz(406.706);

ScanModel truth_model() {
    ScanModel m;
    m.system = {{kWc, ghz(9.0), ghz(5.4)},
                {kWc + ghz(-15.55), kWc + ghz(-14.6), ghz(4.1), ghz(0.08), ghz(0.058)},
                {kWc + ghz(-8.43), kWc + ghz(-7.2), ghz(2.9), ghz(0.097), ghz(0.113)}};
    m.scale = 2000;
    m.background = 20;
    m.order = 5;
    return m;
}

std::vector<double> grid(double lo_ghz, double hi_ghz, int n) {
    std::vector<double> f;
    for (int i = 0; i < n; i++) {
        f.push_back(kWc + ghz(lo_ghz + (hi_ghz - lo_ghz) * i / (n - 1)));
    }
    return f;
}

// Noise-free dataset: counts equal to the expected values.
ScanDataset exact_scan(const ScanModel &m, const std::vector<double> &f, Preparation prep) {
    ScanDataset d;
    d.prep = prep;
    d.freq = f;
    d.counts = simulate_scan(m, f, prep);
    d.weight = shot_noise_weights(d.counts);
    d.excluded.assign(f.size(), 0);
    return d;
}

FreeMask mask_of(std::initializer_list<FitParam> ps) {
    FreeMask m;
    for (FitParam p : ps) {
        m.set(p);
    }
    return m;
}

FitOptions plain_options() {
    FitOptions o;
    o.robust_trim = false;
    return o;
}

}  // namespace

TEST_CASE("simulate: bare cavity dip depth") {
    ScanModel m = truth_model();
    m.system.a = {kWc + ghz(1e4), kWc + ghz(1e4 + 1), ghz(1e-6), ghz(0.08), 0};
    m.system.b = {kWc + ghz(2e4), kWc + ghz(2e4 + 1), ghz(1e-6), ghz(0.08), 0};
    m.scale = 1;
    m.background = 0;
    std::vector<double> f = {kWc - ghz(1), kWc, kWc + ghz(1)};
    std::vector<double> s = simulate_scan(m, f, Preparation::mixed());
    CHECK(s[1] == doctest::Approx(std::pow(1 - 2 * 9.0 / 14.4, 2)).epsilon(1e-9));
    CHECK(s[0] > s[1]);
    CHECK(s[2] > s[1]);
}

TEST_CASE("simulate: ideal preparation without diffusion is the reflection spectrum") {
    ScanModel m = truth_model();
    m.system.a.sigma = m.system.b.sigma = 0;
    std::vector<double> f = grid(-20, 5, 101);
    for (SpinConfig s : kAllSpinConfigs) {
        std::vector<double> sim = simulate_scan(m, f, Preparation::spins(s));
        for (size_t i = 0; i < f.size(); i++) {
            CHECK(sim[i] == doctest::Approx(20 + 2000 * std::norm(m.system.reflection(f[i], s))).epsilon(1e-13));
        }
    }
}

TEST_CASE("simulate: preparation mixtures") {
    ScanModel m = truth_model();
    std::vector<double> f = grid(-20, 5, 41);
    std::vector<double> mixed = simulate_scan(m, f, Preparation::mixed());
    std::array<std::vector<double>, 4> pure;
    for (SpinConfig s : kAllSpinConfigs) {
        pure[s.index()] = simulate_scan(m, f, Preparation::spins(s));
    }
    for (size_t i = 0; i < f.size(); i++) {
        double avg = 0;
        for (const auto &p : pure) {
            avg += 0.25 * (p[i] - 20);
        }
        CHECK(mixed[i] - 20 == doctest::Approx(avg).epsilon(1e-13));
    }
    m.init_fidelity_a = 0.9;
    std::vector<double> imperfect = simulate_scan(m, f, Preparation::spins({Spin::up, Spin::down}));
    for (size_t i = 0; i < f.size(); i++) {
        CHECK(imperfect[i] - 20 == doctest::Approx(0.9 * (pure[1][i] - 20) + 0.1 * (pure[3][i] - 20)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(simulate_scan(m, std::vector<double>{2.0, 1.0}, Preparation::mixed()), Error);
}

TEST_CASE("shot-noise weights") {
    std::vector<double> c = {100, 0, 0.5, 4};
    std::vector<double> w = shot_noise_weights(c);
    CHECK(w[0] == doctest::Approx(0.01));
    CHECK(w[1] == 1);
    CHECK(w[2] == 1);
    CHECK(w[3] == 0.25);
    std::vector<double> flat(10, 50.0);
    for (double x : shot_noise_weights(flat)) {
        CHECK(x == 0.02);
    }
    CHECK_THROWS_AS(shot_noise_weights(std::vector<double>{-1}), Error);
}

TEST_CASE("exclusion near emitter lines") {
    ScanModel m = truth_model();
    ScanDataset d = exact_scan(m, grid(-20, 5, 251), Preparation::mixed());
    exclude_near_lines(d, m.system, ghz(0.5));
    for (size_t i = 0; i < d.freq.size(); i++) {
        double nearest = INFINITY;
        for (double l : {m.system.a.omega_up, m.system.a.omega_down, m.system.b.omega_up, m.system.b.omega_down}) {
            nearest = std::min(nearest, std::abs(d.freq[i] - l));
        }
        CHECK(bool(d.excluded[i]) == (nearest <= ghz(0.5)));
    }
    CHECK(d.active_points() < d.freq.size());
}

TEST_CASE("fit: noiseless round trip from perturbed starts") {
    ScanModel truth = truth_model();
    std::vector<ScanDataset> data = {exact_scan(truth, grid(-30, 20, 201), Preparation::mixed()),
                                     exact_scan(truth, grid(-17, -5, 241), Preparation::spins({Spin::up, Spin::down}))};
    FreeMask mask = mask_of({FitParam::g_a, FitParam::gamma_a, FitParam::g_b, FitParam::gamma_b, FitParam::kappa_w,
                             FitParam::kappa_l, FitParam::omega_c, FitParam::scale, FitParam::background});
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int trial = 0; trial < 2; trial++) {
        ScanModel start = truth;
        for (int k = 0; k < kFitParamCount; k++) {
            FitParam p = FitParam(k);
            if (mask[p] && p != FitParam::omega_c) {
                set_param(start, p, get_param(truth, p) * (1 + u(rng)));
            }
        }
        set_param(start, FitParam::omega_c, kWc + ghz(0.3));
        FitResult r = fit_scans(data, start, mask, plain_options());
        CHECK(r.converged);
        for (int k = 0; k < kFitParamCount; k++) {
            FitParam p = FitParam(k);
            if (p == FitParam::omega_c) {
                CHECK(std::abs(get_param(r.model, p) - kWc) < ghz(1e-6));
            } else if (mask[p]) {
                INFO(fit_param_name(p));
                CHECK(get_param(r.model, p) == doctest::Approx(get_param(truth, p)).epsilon(1e-6));
            }
        }
        // Objective descent over accepted iterations.
        for (size_t i = 1; i < r.residual_history.size(); i++) {
            CHECK(r.residual_history[i] <= r.residual_history[i - 1] * (1 + 1e-12));
        }
        CHECK(get_param(r.model, FitParam::kappa_l) < get_param(r.model, FitParam::kappa_w));
    }
}

TEST_CASE("fit: optimizer Jacobian matches central differences of the scan model") {
    ScanModel truth = truth_model();
    std::vector<ScanDataset> data = {exact_scan(truth, grid(-25, 10, 71), Preparation::mixed())};
    for (double &w : data[0].weight) {
        w = 1;
    }
    FitOptions opt = plain_options();
    opt.center_weight = 1;
    std::vector<FitParam> params = {FitParam::g_a,     FitParam::gamma_a, FitParam::sigma_a, FitParam::omega_a,
                                    FitParam::g_b,     FitParam::kappa_w, FitParam::kappa_l, FitParam::omega_c,
                                    FitParam::scale,   FitParam::background};
    FreeMask mask;
    for (FitParam p : params) {
        mask.set(p);
    }
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> u(-0.15, 0.15);
    for (int trial = 0; trial < 3; trial++) {
        ScanModel m = truth;
        for (FitParam p : params) {
            if (p != FitParam::omega_c && p != FitParam::omega_a) {
                set_param(m, p, get_param(truth, p) * (1 + u(rng)));
            }
        }
        auto jac = residual_jacobian(data, m, mask, opt);
        REQUIRE(jac.size() == data[0].freq.size());
        for (size_t c = 0; c < params.size(); c++) {
            FitParam p = params[c];
            double v = get_param(m, p);
            double h = p == FitParam::scale || p == FitParam::background ? 1e-4 * std::abs(v) : ghz(1e-5);
            ScanModel up = m, dn = m;
            set_param(up, p, v + h);
            set_param(dn, p, v - h);
            std::vector<double> su = simulate_scan(up, data[0].freq, data[0].prep);
            std::vector<double> sd = simulate_scan(dn, data[0].freq, data[0].prep);
            double norm = 0, diff = 0;
            for (size_t i = 0; i < su.size(); i++) {
                double fd = -(su[i] - sd[i]) / (2 * h);
                norm += fd * fd;
                diff += (fd - jac[i][c]) * (fd - jac[i][c]);
            }
            INFO(fit_param_name(p));
            CHECK(std::sqrt(diff) <= 1e-5 * std::sqrt(norm));
        }
    }
}

TEST_CASE("fit: standard errors scale as one over root N") {
    ScanModel truth = truth_model();
    std::mt19937_64 rng(71);
    ScanDataset one = synthetic_scan(truth, grid(-30, 20, 151), Preparation::mixed(), rng);
    FreeMask mask = mask_of({FitParam::kappa_w, FitParam::kappa_l, FitParam::scale, FitParam::background});
    FitResult r1 = fit_scan(one, truth, mask, plain_options());
    for (int n : {4, 9}) {
        std::vector<ScanDataset> rep(size_t(n), one);
        FitResult rn = fit_scans(rep, truth, mask, plain_options());
        for (FitParam p : {FitParam::kappa_w, FitParam::kappa_l}) {
            int k = static_cast<int>(p);
            CHECK(rn.value[k] == doctest::Approx(r1.value[k]).epsilon(1e-6));
            double ratio = rn.stderr_[k] / r1.stderr_[k];
            // Exact up to the change in degrees of freedom of the reduced chi-square.
            CHECK(ratio * std::sqrt(double(n)) * std::sqrt(r1.reduced_chi2 / rn.reduced_chi2) ==
                  doctest::Approx(1).epsilon(1e-4));
            CHECK(ratio * std::sqrt(double(n)) == doctest::Approx(1).epsilon(0.02));
        }
    }
}

TEST_CASE("fit: all parameters fixed evaluates residuals only") {
    ScanModel truth = truth_model();
    std::mt19937_64 rng(73);
    ScanDataset d = synthetic_scan(truth, grid(-30, 20, 101), Preparation::mixed(), rng);
    FitResult r = fit_scan(d, truth, FreeMask{}, plain_options());
    CHECK(r.iterations == 0);
    CHECK(r.converged);
    std::vector<double> res = weighted_residuals(std::span(&d, 1), truth, plain_options());
    double ss = 0;
    for (double x : res) {
        ss += x * x;
    }
    CHECK(r.residual_norm == doctest::Approx(std::sqrt(ss)).epsilon(1e-14));
}

TEST_CASE("fit: rank deficiency names the unidentifiable parameter") {
    ScanModel truth = truth_model();
    std::vector<ScanDataset> data = {exact_scan(truth, grid(-30, 20, 101), Preparation::mixed())};
    // With zero modulation amplitude the modulation phase has no effect on the spectrum.
    FreeMask mask = mask_of({FitParam::scale, FitParam::mod_phase});
    try {
        fit_scans(data, truth, mask, plain_options());
        FAIL("expected a rank-deficiency error");
    } catch (const FitError &e) {
        CHECK(e.code() == ErrorCode::rank_deficient);
        CHECK(std::string(e.what()).find("mod_phase") != std::string::npos);
    }
}

TEST_CASE("fit: iteration limit raises non-convergence with the best point") {
    ScanModel truth = truth_model();
    std::vector<ScanDataset> data = {exact_scan(truth, grid(-30, 20, 101), Preparation::mixed())};
    ScanModel start = truth;
    set_param(start, FitParam::kappa_w, ghz(11));
    FitOptions opt = plain_options();
    opt.max_iterations = 1;
    try {
        fit_scans(data, start, mask_of({FitParam::kappa_w, FitParam::kappa_l, FitParam::scale}), opt);
        FAIL("expected non-convergence");
    } catch (const FitError &e) {
        CHECK(e.code() == ErrorCode::not_converged);
        CHECK(e.best_so_far().iterations == 1);
        CHECK(e.best_so_far().residual_norm > 0);
    }
}

TEST_CASE("fit: too few active points") {
    ScanModel truth = truth_model();
    ScanDataset d = exact_scan(truth, grid(-30, 20, 3), Preparation::mixed());
    CHECK_THROWS_AS(fit_scan(d, truth, mask_of({FitParam::g_a, FitParam::g_b, FitParam::kappa_w, FitParam::scale}),
                             plain_options()),
                    Error);
}

TEST_CASE("fit: robust trim drops injected outliers") {
    ScanModel truth = truth_model();
    std::mt19937_64 rng(79);
    ScanDataset d = synthetic_scan(truth, grid(-30, 20, 201), Preparation::mixed(), rng);
    for (size_t i : {10u, 90u, 150u}) {
        d.counts[i] *= 3;
    }
    FitResult r = fit_scan(d, truth, mask_of({FitParam::kappa_w, FitParam::kappa_l, FitParam::scale}));
    CHECK(r.trimmed_points >= 3);
    CHECK(get_param(r.model, FitParam::kappa_w) == doctest::Approx(ghz(9)).epsilon(0.02));
}

TEST_CASE("fit: simplex fallback reaches the same optimum") {
    ScanModel truth = truth_model();
    std::vector<ScanDataset> data = {exact_scan(truth, grid(-30, 20, 101), Preparation::mixed())};
    ScanModel start = truth;
    set_param(start, FitParam::kappa_w, ghz(10));
    set_param(start, FitParam::kappa_l, ghz(5));
    FitOptions opt = plain_options();
    opt.method = FitMethod::nelder_mead;
    opt.max_iterations = 2000;
    opt.tolerance = 1e-9;
    FitResult r = fit_scans(data, start, mask_of({FitParam::kappa_w, FitParam::kappa_l}), opt);
    CHECK(get_param(r.model, FitParam::kappa_w) == doctest::Approx(ghz(9)).epsilon(1e-5));
    CHECK(get_param(r.model, FitParam::kappa_l) == doctest::Approx(ghz(5.4)).epsilon(1e-5));
}

TEST_CASE("scan csv reading and fit report") {
    std::istringstream in("# comment\nfreq_hz,counts\n406706000000000,12\n406707000000000,30\n");
    ScanDataset d = read_scan_csv(in, Preparation::mixed());
    REQUIRE(d.freq.size() == 2);
    CHECK(d.freq[0] == doctest::Approx(hz(406706e9)));
    CHECK(d.weight[0] == doctest::Approx(1 / 12.0));
    std::istringstream bad("frequency,counts\n1,2\n");
    CHECK_THROWS_AS(read_scan_csv(bad, Preparation::mixed()), Error);
    std::istringstream junk("freq_hz,counts\n1,abc\n");
    CHECK_THROWS_AS(read_scan_csv(junk, Preparation::mixed()), Error);
    FitResult r;
    r.model = truth_model();
    std::ostringstream out;
    write_fit_report(out, r);
    CHECK(out.str().rfind("parameter,value,stderr,unit,free\ng_a,", 0) == 0);
}

TEST_CASE("fit parameter names round trip") {
    for (int k = 0; k < kFitParamCount; k++) {
        CHECK(parse_fit_param(fit_param_name(FitParam(k))) == FitParam(k));
    }
    CHECK_THROWS_AS(parse_fit_param("nope"), Error);
    ScanModel m = truth_model();
    set_param(m, FitParam::omega_a, get_param(m, FitParam::omega_a) + ghz(1));
    CHECK(m.system.a.omega_up == doctest::Approx(kWc + ghz(-14.55)));
    CHECK(m.system.a.omega_down == doctest::Approx(kWc + ghz(-13.6)));
}
