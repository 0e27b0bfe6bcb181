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
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fbh/analysis.hpp"
#include "fbh/interferometer.hpp"
#include "fbh/spin_register.hpp"

namespace fbh {

enum class ErrorSource { decoherence, microwave, two_photon, detuning, phase, carrier, diffusion, contrast };

inline constexpr std::array<ErrorSource, 8> kAllErrorSources = {
    ErrorSource::decoherence, ErrorSource::microwave, ErrorSource::two_photon, ErrorSource::detuning,
    ErrorSource::phase,       ErrorSource::carrier,   ErrorSource::diffusion,  ErrorSource::contrast,
};

const char *error_source_name(ErrorSource s);
const char *error_source_label(ErrorSource s);
ErrorSource parse_error_source(const std::string &name);

// Everything the heralded-state prediction needs. Line positions in `system` are those seen while the
// interferometer phase is calibrated; `drift_a` moves emitter A's lines for the entanglement run only.
struct FidelityModel {
    CqedSystem system;
    SidebandConfig sidebands;
    double drift_a = 0;
    EchoTiming timing;
    EchoNoise noise;
    double n_mean = 0;
    int diffusion_order = 11;
    int mw_phases = 24;

    void validate() const;
};

struct Toggles {
    std::array<bool, 8> eliminated{};

    bool operator[](ErrorSource s) const { return eliminated[static_cast<int>(s)]; }
    Toggles with(ErrorSource s) const;
    static Toggles all_but_contrast();
};

struct Prediction {
    double fidelity;
    double dphi;
    CorrelationData correlations;
    TwoQubitState state;
};

// Interferometer phase in [0, 2 pi) minimizing the up-up transmission; order 0 disables diffusion averaging.
double dark_port_phase(const CqedSystem &system, const SidebandConfig &cfg, int order);

// Interferometer phase minimizing the diffusion-averaged up-up transmission with phi_c = 0 and no drift.
double calibrate_phase(const FidelityModel &model);

// Sideband frequencies at the maximal-contrast points of each emitter's diffusion-averaged spectrum.
SidebandConfig max_contrast_sidebands(const FidelityModel &model);

Prediction predict(const FidelityModel &model, double mw_phase_b, const Toggles &toggles = {});

struct BudgetRow {
    ErrorSource source;
    double mean;
    double min;
    double max;
    double stddev;
};

struct ErrorBudget {
    std::vector<BudgetRow> rows;
    double fidelity_mean = 0;
    double fidelity_min = 0;
    double fidelity_max = 0;
    double total_expected = 0;
    double sum_of_rows = 0;
    std::vector<double> fidelity_per_phase;
    std::vector<std::string> warnings;
};

ErrorBudget error_budget(const FidelityModel &model, std::span<const ErrorSource> sources, int threads = 1);

void write_error_budget_csv(std::ostream &out, const ErrorBudget &budget);

// Transmission ratios |T_s|^2 / |T_uu|^2 at the calibrated phase, phase-scan configuration.
std::array<double, 4> transmission_ratios(const FidelityModel &model);

}  // namespace fbh
