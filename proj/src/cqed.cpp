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

#include "fbh/cqed.hpp"

#include <cmath>
#include <limits>

#include "fbh/errors.hpp"

namespace fbh {

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

SpinConfig SpinConfig::from_index(int i) {
    if (i < 0 || i > 3) {
        domain_error("spin configuration index out of range: " + std::to_string(i));
    }
    return kAllSpinConfigs[i];
}

std::string SpinConfig::label() const {
    std::string s;
    s += a == Spin::up ? "up" : "down";
    s += "_";
    s += b == Spin::up ? "up" : "down";
    return s;
}

void CavityParams::validate() const {
    if (!finite(omega_c) || !finite(kappa_w) || !finite(kappa_l)) {
        domain_error("cavity: non-finite parameter");
    }
    if (!(kappa_w > 0)) {
        domain_error("cavity.kappa_w must be > 0");
    }
    if (!(kappa_l >= 0)) {
        domain_error("cavity.kappa_l must be >= 0");
    }
}

void EmitterParams::validate(const char *name) const {
    std::string n = name;
    if (!finite(omega_up) || !finite(omega_down) || !finite(g) || !finite(gamma) || !finite(sigma)) {
        domain_error(n + ": non-finite parameter");
    }
    if (!(g > 0)) {
        domain_error(n + ".g must be > 0");
    }
    if (!(gamma > 0)) {
        domain_error(n + ".gamma must be > 0");
    }
    if (!(sigma >= 0)) {
        domain_error(n + ".sigma must be >= 0");
    }
    if (omega_up == omega_down) {
        domain_error(n + ": omega_up must differ from omega_down");
    }
}

EmitterLine emitter_line(const EmitterParams &e, Spin s, double offset) {
    return {e.resonance(s) + offset, e.g, e.gamma};
}

cplx reflection_amplitude(double omega_laser, const CavityParams &cavity, std::span<const EmitterLine> emitters) {
    if (!finite(omega_laser) || !finite(cavity.omega_c) || !finite(cavity.kappa_w) || !finite(cavity.kappa_l)) {
        domain_error("reflection_amplitude: non-finite input");
    }
    cplx denom(cavity.kappa_tot(), omega_laser - cavity.omega_c);
    for (const EmitterLine &e : emitters) {
        if (!finite(e.omega) || !finite(e.g) || !finite(e.gamma)) {
            domain_error("reflection_amplitude: non-finite emitter parameter");
        }
        denom += e.g * e.g / cplx(e.gamma, omega_laser - e.omega);
    }
    return 1.0 - 2.0 * cavity.kappa_w / denom;
}

void CqedSystem::validate() const {
    cavity.validate();
    a.validate("emitter_a");
    b.validate("emitter_b");
}

cplx CqedSystem::reflection(double omega_laser, SpinConfig s, double offset_a, double offset_b) const {
    std::array<EmitterLine, 2> lines = {emitter_line(a, s.a, offset_a), emitter_line(b, s.b, offset_b)};
    return reflection_amplitude(omega_laser, cavity, lines);
}

double cooperativity(double g, double kappa_tot, double gamma) {
    if (!finite(g) || !finite(kappa_tot) || !finite(gamma)) {
        domain_error("cooperativity: non-finite input");
    }
    if (kappa_tot * gamma == 0) {
        domain_error("cooperativity: zero denominator kappa_tot * gamma");
    }
    return g * g / (kappa_tot * gamma);
}

OptimalDetunings optimal_detunings(double g, double gamma, double kappa_w, double kappa_l) {
    if (!finite(g) || !finite(gamma) || !finite(kappa_w) || !finite(kappa_l) || !(gamma > 0)) {
        domain_error("optimal_detunings: need finite inputs and gamma > 0");
    }
    double excess = 2 * kappa_w - (kappa_w + kappa_l);
    if (!(excess > 0)) {
        domain_error("optimal_detunings: cavity is not overcoupled (need 2 kappa_w - kappa_tot > 0)");
    }
    double radicand = g * g * gamma / excess - gamma * gamma;
    if (radicand < 0) {
        domain_error("optimal_detunings: negative radicand (need g^2 gamma / (2 kappa_w - kappa_tot) >= gamma^2)");
    }
    OptimalDetunings d;
    d.delta_a = std::sqrt(radicand);
    d.delta_c = excess / gamma * d.delta_a;
    d.delta = d.delta_c - d.delta_a;
    d.delta_approx = g * std::sqrt((kappa_w - kappa_l) / gamma);
    return d;
}

double contrast_bandwidth(double kappa_w, double contrast) {
    if (!(contrast >= 1)) {
        domain_error("contrast_bandwidth: contrast must be >= 1");
    }
    if (contrast == 1) {
        return std::numeric_limits<double>::infinity();
    }
    return 2 * kappa_w / std::sqrt(contrast - 1);
}

}  // namespace fbh
