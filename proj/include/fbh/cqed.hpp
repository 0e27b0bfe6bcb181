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

#pragma once

#include <array>
#include <complex>
#include <span>
#include <string>

namespace fbh {

using cplx = std::complex<double>;

enum class Spin { up, down };

inline Spin flipped(Spin s) { return s == Spin::up ? Spin::down : Spin::up; }

// Basis order is {up-up, up-down, down-up, down-down}; the first letter is emitter A.
struct SpinConfig {
    Spin a = Spin::up;
    Spin b = Spin::up;

    int index() const { return (a == Spin::down ? 2 : 0) + (b == Spin::down ? 1 : 0); }
    static SpinConfig from_index(int i);
    std::string label() const;
    bool odd_parity() const { return a != b; }
    bool operator==(const SpinConfig &) const = default;
};

inline constexpr std::array<SpinConfig, 4> kAllSpinConfigs = {
    SpinConfig{Spin::up, Spin::up},
    SpinConfig{Spin::up, Spin::down},
    SpinConfig{Spin::down, Spin::up},
    SpinConfig{Spin::down, Spin::down},
};

struct CavityParams {
    double omega_c = 0;
    double kappa_w = 0;
    double kappa_l = 0;

    double kappa_tot() const { return kappa_w + kappa_l; }
    void validate() const;
};

struct EmitterParams {
    double omega_up = 0;
    double omega_down = 0;
    double g = 0;
    double gamma = 0;
    double sigma = 0;

    double resonance(Spin s) const { return s == Spin::up ? omega_up : omega_down; }
    void validate(const char *name = "emitter") const;
};

// One optical transition as seen by the cavity: resonance, coupling, linewidth.
struct EmitterLine {
    double omega = 0;
    double g = 0;
    double gamma = 0;
};

EmitterLine emitter_line(const EmitterParams &e, Spin s, double offset = 0);

// R = 1 - 2 kw / (i dc + ktot + sum_k g_k^2 / (i da_k + gamma_k)), detunings laser minus resonance.
cplx reflection_amplitude(double omega_laser, const CavityParams &cavity, std::span<const EmitterLine> emitters);

struct CqedSystem {
    CavityParams cavity;
    EmitterParams a;
    EmitterParams b;

    void validate() const;
    // Offsets shift each emitter's lines, e.g. a spectral-diffusion realization.
    cplx reflection(double omega_laser, SpinConfig s, double offset_a = 0, double offset_b = 0) const;
};

double cooperativity(double g, double kappa_tot, double gamma);

struct OptimalDetunings {
    double delta_a;
    double delta_c;
    double delta;
    double delta_approx;
};

OptimalDetunings optimal_detunings(double g, double gamma, double kappa_w, double kappa_l);

double contrast_bandwidth(double kappa_w, double contrast);

}  // namespace fbh
