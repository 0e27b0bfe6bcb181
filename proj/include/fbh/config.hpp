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

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fbh/herald.hpp"
#include "fbh/model.hpp"
#include "fbh/spectra_fit.hpp"

namespace fbh {

struct EmitterLines {
    double detuning = 0;   // omega_down - omega_c
    double splitting = 0;  // omega_down - omega_up
    double g = 0;
    double gamma = 0;
    double sigma = 0;
};

// Full run configuration in SI units with angular frequencies.
struct Config {
    CavityParams cavity;
    EmitterLines emitter_a;
    EmitterLines emitter_b;

    double carrier_detuning = 0;  // carrier - omega_c
    SidebandConfig sidebands;     // omega_carrier is derived from carrier_detuning
    bool calibrate_phase = true;
    double interferometer_phase = 0;

    // Line positions during the interferometer experiments, relative to the spectroscopy values.
    double line_shift_a = 0;
    double line_shift_b = 0;
    double drift_a = 0;

    EchoTiming timing;
    EchoNoise noise;
    int diffusion_order = 11;
    int mw_phases = 24;

    ProtocolConfig protocol;
    uint64_t trials = 20000;
    bool sample_diffusion = true;
    size_t postselect_window = 500;
    double postselect_max_a = 0.17;
    double postselect_max_b = 0.15;

    int phase_scan_points = 361;
    int phase_scan_order = 21;
    bool phase_scan_sigma_average = true;
    double phase_scan_phi_c = 0;

    PowerModulation modulation;
    double scan_background = 0;
    double scan_scale = 1;
    double scan_init_fidelity_a = 1;
    double scan_init_fidelity_b = 1;
    int scan_order = 11;
    // Unpolarized scans drop points this close to any emitter line.
    double scan_exclude_half_width = 0;
    FitOptions fit;

    JumpTraceConfig jump;

    CqedSystem spectroscopy_system() const;
    CqedSystem operating_system() const;
    FidelityModel fidelity_model() const;
    ExperimentModel experiment_model() const;
    ScanModel scan_model() const;

    // Throws ErrorCode::config naming the offending key.
    void validate() const;
};

const std::vector<std::string> &preset_names();
Config preset(const std::string &name);

// Applies one "key = value unit" assignment.
void apply_setting(Config &cfg, const std::string &assignment);
void apply_setting(Config &cfg, const std::string &key, const std::string &value);

// Reads assignments on top of `base`; lines may be grouped under [section] headers.
Config parse_config(std::istream &in, Config base = {});
Config load_config(const std::string &path, Config base = {});

void dump_config(std::ostream &out, const Config &cfg);
std::string config_hash(const Config &cfg);

std::vector<std::string> config_keys();

}  // namespace fbh
