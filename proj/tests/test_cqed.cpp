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
#include <vector>

#include "doctest.h"
#include "fbh/cqed.hpp"
#include "fbh/errors.hpp"
#include "fbh/quadrature.hpp"
#include "fbh/units.hpp"

using namespace fbh;

namespace {

CavityParams table_cavity() { return {thz(406.706), ghz(9.0), ghz(5.4)}; }

// Independent evaluation of the reflection formula in ordinary frequency units.
cplx reflection_oracle(double f_l, double f_c, double kw, double kl, const std::vector<EmitterLine> &lines) {
    cplx s = 0;
    for (const EmitterLine &e : lines) {
        double g = e.g / kTwoPi, gam = e.gamma / kTwoPi, f = e.omega / kTwoPi;
        s += g * g / (cplx(0, 1) * (f_l - f) + gam);
    }
    return 1.0 - 2.0 * kw / (cplx(0, 1) * (f_l - f_c) + kw + kl + s);
}

}  // namespace

TEST_CASE("reflection: bare cavity on resonance") {
    CavityParams c = table_cavity();
    cplx r = reflection_amplitude(c.omega_c, c, {});
    CHECK(r.real() == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(std::abs(r.imag()) < 1e-15);
}

TEST_CASE("reflection: far off resonance tends to one monotonically") {
    CavityParams c = table_cavity();
    std::vector<EmitterLine> lines = {{c.omega_c - ghz(14.6), ghz(4.1), ghz(0.08)},
                                      {c.omega_c - ghz(7.2), ghz(2.9), ghz(0.097)}};
    double prev = 1;
    for (double d : {100.0, 300.0, 1e3, 1e4, 1e5}) {
        double dev = std::abs(reflection_amplitude(c.omega_c + ghz(d), c, lines) - 1.0);
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("reflection: emitter susceptibilities add") {
    CavityParams c = table_cavity();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-20, 20);
    for (int k = 0; k < 200; k++) {
        std::vector<EmitterLine> lines = {{c.omega_c + ghz(u(rng)), ghz(4.1), ghz(0.08)},
                                          {c.omega_c + ghz(u(rng)), ghz(2.9), ghz(0.097)}};
        double wl = c.omega_c + ghz(u(rng));
        cplx r = reflection_amplitude(wl, c, lines);
        cplx o = reflection_oracle(wl / kTwoPi, c.omega_c / kTwoPi, 9e9, 5.4e9, lines);
        CHECK(std::abs(r - o) < 1e-9);
    }
}

TEST_CASE("reflection: non-finite input is a domain error") {
    CavityParams c = table_cavity();
    CHECK_THROWS_AS(reflection_amplitude(NAN, c, {}), Error);
}

TEST_CASE("cooperativity") {
    CHECK(cooperativity(ghz(4.1), ghz(14.5), ghz(0.080)) == doctest::Approx(14.491).epsilon(1e-4));
    CHECK(cooperativity(ghz(2.9), ghz(14.5), ghz(0.097)) == doctest::Approx(5.979).epsilon(1e-3));
    CHECK(cooperativity(ghz(4.1), ghz(14.4), ghz(0.080)) == doctest::Approx(4.1 * 4.1 / (14.4 * 0.08)));
    CHECK(cooperativity(1e-9, ghz(14.4), ghz(0.08)) < 1e-25);
    CHECK_THROWS_AS(cooperativity(ghz(1), 0, ghz(1)), Error);
}

TEST_CASE("optimal detunings: closed form and approximation") {
    OptimalDetunings d = optimal_detunings(ghz(4.1), ghz(0.08), ghz(9.0), ghz(5.4));
    CHECK(d.delta_approx == doctest::Approx(ghz(4.1 * std::sqrt(3.6 / 0.08))).epsilon(1e-12));
    CHECK(to_ghz(d.delta_approx) == doctest::Approx(27.5).epsilon(2e-3));
    CHECK(d.delta == doctest::Approx(d.delta_c - d.delta_a));
}

TEST_CASE("optimal detunings: zero reflection at the constructed point") {
    CavityParams c = table_cavity();
    OptimalDetunings d = optimal_detunings(ghz(4.1), ghz(0.08), c.kappa_w, c.kappa_l);
    std::vector<EmitterLine> e = {{c.omega_c - d.delta, ghz(4.1), ghz(0.08)}};
    CHECK(std::abs(reflection_amplitude(c.omega_c - d.delta_c, c, e)) < 1e-9);
}

TEST_CASE("optimal detunings: boundary and preconditions") {
    double kw = ghz(9), kl = ghz(5.4), g = ghz(1);
    double gamma = g * g / (2 * kw - kw - kl);
    OptimalDetunings d = optimal_detunings(g, gamma, kw, kl);
    CHECK(d.delta_a == 0);
    CHECK_THROWS_AS(optimal_detunings(g, 1.01 * gamma, kw, kl), Error);
    CHECK_THROWS_AS(optimal_detunings(g, gamma, ghz(5), ghz(6)), Error);
}

TEST_CASE("contrast bandwidth") {
    double kw = ghz(9.0);
    CHECK(contrast_bandwidth(kw, 10) == doctest::Approx(2 * kw / 3).epsilon(1e-15));
    CHECK(contrast_bandwidth(kw, 2) == doctest::Approx(ghz(18.0)).epsilon(1e-15));
    CHECK(contrast_bandwidth(kw, 1e12) < 1e-5 * kw);
    CHECK_THROWS_AS(contrast_bandwidth(kw, 0.5), Error);
}

TEST_CASE("contrast bandwidth agrees with a bisection root of |R|^2 = 1/contrast") {
    double kw = ghz(9.0);
    for (double contrast : {1.5, 2.0, 4.0, 10.0, 100.0}) {
        auto f = [&](double dc) { return std::norm(1.0 - 2 * kw / cplx(2 * kw, dc)) - 1 / contrast; };
        double lo = 0, hi = 100 * kw;
        for (int i = 0; i < 200; i++) {
            double mid = 0.5 * (lo + hi);
            (f(mid) < 0 ? lo : hi) = mid;
        }
        CHECK(std::abs(contrast_bandwidth(kw, contrast) / (0.5 * (lo + hi)) - 1) < 1e-9);
    }
}

TEST_CASE("gauss-hermite weights sum to one and integrate moments") {
    for (int order : {1, 2, 5, 11, 21}) {
        GaussHermite gh = gauss_hermite(order);
        double sum = 0;
        for (double w : gh.weights) {
            sum += w;
        }
        CHECK(sum == doctest::Approx(1).epsilon(1e-13));
    }
    GaussHermite gh = gauss_hermite(11);
    double m4 = 0;
    for (size_t i = 0; i < gh.nodes.size(); i++) {
        m4 += gh.weights[i] * std::pow(gh.nodes[i], 4);
    }
    CHECK(m4 == doctest::Approx(3).epsilon(1e-12));
}

TEST_CASE("diffusion average: trivial cases and second moment") {
    double w0 = ghz(-14.6), s = mhz(58);
    auto f = [](double w) { return std::cos(w * 1e-10); };
    CHECK(diffusion_average(f, w0, 0.0) == f(w0));
    CHECK(diffusion_average([](double w) { return w; }, w0, s) == doctest::Approx(w0).epsilon(1e-14));
    double m2 = diffusion_average([&](double w) { return (w - w0) * (w - w0); }, w0, s);
    CHECK(m2 == doctest::Approx(s * s).epsilon(1e-10));
    CHECK_THROWS_AS(diffusion_average(f, w0, -1.0), Error);
}

TEST_CASE("diffusion average converges for the preset spectra") {
    CqedSystem sys{table_cavity(),
                   {thz(406.706) + ghz(-15.55), thz(406.706) + ghz(-14.6), ghz(4.1), ghz(0.08), ghz(0.058)},
                   {thz(406.706) + ghz(-8.43), thz(406.706) + ghz(-7.2), ghz(2.9), ghz(0.097), ghz(0.113)}};
    for (double d = -20; d <= 0; d += 0.25) {
        double wl = sys.cavity.omega_c + ghz(d);
        for (SpinConfig s : kAllSpinConfigs) {
            auto r2 = [&](int order) {
                DiffusionGrid g = diffusion_grid(sys.a.sigma, sys.b.sigma, order);
                double acc = 0;
                for (size_t n = 0; n < g.size(); n++) {
                    acc += g.weight[n] * std::norm(sys.reflection(wl, s, g.offset_a[n], g.offset_b[n]));
                }
                return acc;
            };
            double a = r2(21), b = r2(42);
            CHECK(std::abs(a - b) <= 1e-6 * std::abs(b));
        }
    }
}

TEST_CASE("diffusion grid collapses a zero-width axis") {
    DiffusionGrid g = diffusion_grid(0, mhz(100), 7);
    CHECK(g.size() == 7);
    for (double a : g.offset_a) {
        CHECK(a == 0);
    }
    CHECK(diffusion_grid(0, 0, 7).size() == 1);
}

TEST_CASE("spin configuration labels round trip") {
    for (int i = 0; i < 4; i++) {
        CHECK(SpinConfig::from_index(i).index() == i);
    }
    CHECK(SpinConfig{Spin::up, Spin::down}.label() == "up_down");
    CHECK(SpinConfig{Spin::down, Spin::up}.odd_parity());
    CHECK_THROWS_AS(SpinConfig::from_index(4), Error);
}
