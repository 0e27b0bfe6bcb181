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
#include <ostream>
#include <span>
#include <vector>

#include "fbh/cqed.hpp"

namespace fbh {

struct SidebandConfig {
    double omega_carrier = 0;
    double omega_mw = 0;
    double c_carrier = 0;
    double c_sideband = 0;
    double phi_c = 0;
    double phi_mu = 0;
    double delta_L = 0;

    double interferometer_phase() const { return 2 * phi_mu; }
    void set_interferometer_phase(double dphi) { phi_mu = 0.5 * dphi; }
    void validate() const;
};

struct FilterCavity {
    double omega_0 = 0;
    double fwhm = 0;
    double fsr = 0;
    double peak_transmission = 0;

    void validate() const;
};

struct SidebandFrequencies {
    double sb_a;
    double sb_b;
    double carrier;
};

SidebandFrequencies sideband_frequencies(const SidebandConfig &cfg);

double phase_from_mw_frequency(double omega_mw, double delta_L);

// Heralding-port amplitude, unnormalized:
// c_c R(w_car) e^{i phi_c} + c_s R(w_car - W) e^{-i dphi/2} + c_s R(w_car + W) e^{+i dphi/2}.
cplx transmission_amplitude(SpinConfig spin, const SidebandConfig &cfg, const CqedSystem &system, double offset_a = 0,
                            double offset_b = 0);

using TransmissionMap = std::array<cplx, 4>;

TransmissionMap transmission_map(const SidebandConfig &cfg, const CqedSystem &system, double offset_a = 0,
                                 double offset_b = 0);

// The four per-state reflection triples (carrier, sideband A, sideband B) at one diffusion realization.
// Evaluating T at many phases from these avoids recomputing reflections.
struct ReflectionSet {
    std::array<cplx, 4> carrier;
    std::array<cplx, 4> sb_a;
    std::array<cplx, 4> sb_b;
    double weight = 1;

    TransmissionMap transmission(const SidebandConfig &cfg, double dphi) const;
};

// One ReflectionSet per node of the diffusion grid for both emitters. order 0 means no averaging.
std::vector<ReflectionSet> reflection_ensemble(const SidebandConfig &cfg, const CqedSystem &system, int order);

struct PhaseScanRow {
    double phase;
    SpinConfig state;
    double mean_t2;
    double var_t2;
};

std::vector<PhaseScanRow> phase_scan(std::span<const SpinConfig> states, std::span<const double> phases,
                                     const SidebandConfig &cfg, const CqedSystem &system, bool sigma_average,
                                     int order = 21);

void write_phase_scan_csv(std::ostream &out, std::span<const PhaseScanRow> rows);

double filter_transmission(double omega, const FilterCavity &filter);

}  // namespace fbh
