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

#include "fbh/interferometer.hpp"

#include <cmath>

#include "fbh/csv.hpp"
#include "fbh/errors.hpp"
#include "fbh/quadrature.hpp"
#include "fbh/units.hpp"

namespace fbh {

void SidebandConfig::validate() const {
    if (!(c_carrier >= 0 && c_carrier <= 1)) {
        domain_error("interferometer.c_carrier must lie in [0, 1]");
    }
    if (!(c_sideband >= 0 && c_sideband <= 1)) {
        domain_error("interferometer.c_sideband must lie in [0, 1]");
    }
    if (!(omega_mw > 0)) {
        domain_error("interferometer.omega_mw must be > 0");
    }
    if (!std::isfinite(omega_carrier) || !std::isfinite(phi_c) || !std::isfinite(phi_mu)) {
        domain_error("interferometer: non-finite parameter");
    }
    if (!(delta_L >= 0)) {
        domain_error("interferometer.delta_L must be >= 0");
    }
}

void FilterCavity::validate() const {
    if (!(fwhm > 0 && fwhm < fsr)) {
        domain_error("filter: need 0 < fwhm < fsr");
    }
    if (!(peak_transmission >= 0 && peak_transmission <= 1)) {
        domain_error("filter.peak_transmission must lie in [0, 1]");
    }
}

SidebandFrequencies sideband_frequencies(const SidebandConfig &cfg) {
    if (!(cfg.omega_mw > 0)) {
        domain_error("sideband_frequencies: omega_mw must be > 0");
    }
    return {cfg.omega_carrier - cfg.omega_mw, cfg.omega_carrier + cfg.omega_mw, cfg.omega_carrier};
}

double phase_from_mw_frequency(double omega_mw, double delta_L) {
    if (!(delta_L > 0)) {
        domain_error("phase_from_mw_frequency: delta_L must be > 0");
    }
    // Reduce the cycle count first so large phases keep full precision.
    double cycles = omega_mw / kTwoPi * delta_L / kSpeedOfLight;
    double frac = cycles - std::floor(cycles);
    return kTwoPi * frac;
}

cplx transmission_amplitude(SpinConfig spin, const SidebandConfig &cfg, const CqedSystem &system, double offset_a,
                            double offset_b) {
    SidebandFrequencies f = sideband_frequencies(cfg);
    double half = 0.5 * cfg.interferometer_phase();
    return cfg.c_carrier * system.reflection(f.carrier, spin, offset_a, offset_b) * std::polar(1.0, cfg.phi_c) +
           cfg.c_sideband * system.reflection(f.sb_a, spin, offset_a, offset_b) * std::polar(1.0, -half) +
           cfg.c_sideband * system.reflection(f.sb_b, spin, offset_a, offset_b) * std::polar(1.0, half);
}

TransmissionMap transmission_map(const SidebandConfig &cfg, const CqedSystem &system, double offset_a,
                                 double offset_b) {
    TransmissionMap t;
    for (SpinConfig s : kAllSpinConfigs) {
        t[s.index()] = transmission_amplitude(s, cfg, system, offset_a, offset_b);
    }
    return t;
}

TransmissionMap ReflectionSet::transmission(const SidebandConfig &cfg, double dphi) const {
    cplx ec = cfg.c_carrier * std::polar(1.0, cfg.phi_c);
    cplx ea = cfg.c_sideband * std::polar(1.0, -0.5 * dphi);
    cplx eb = cfg.c_sideband * std::polar(1.0, 0.5 * dphi);
    TransmissionMap t;
    for (int k = 0; k < 4; k++) {
        t[k] = ec * carrier[k] + ea * sb_a[k] + eb * sb_b[k];
    }
    return t;
}

std::vector<ReflectionSet> reflection_ensemble(const SidebandConfig &cfg, const CqedSystem &system, int order) {
    SidebandFrequencies f = sideband_frequencies(cfg);
    DiffusionGrid grid = order > 0 ? diffusion_grid(system.a.sigma, system.b.sigma, order) : diffusion_grid(0, 0, 1);
    std::vector<ReflectionSet> out(grid.size());
    for (size_t n = 0; n < grid.size(); n++) {
        ReflectionSet &r = out[n];
        r.weight = grid.weight[n];
        for (SpinConfig s : kAllSpinConfigs) {
            int k = s.index();
            r.carrier[k] = system.reflection(f.carrier, s, grid.offset_a[n], grid.offset_b[n]);
            r.sb_a[k] = system.reflection(f.sb_a, s, grid.offset_a[n], grid.offset_b[n]);
            r.sb_b[k] = system.reflection(f.sb_b, s, grid.offset_a[n], grid.offset_b[n]);
        }
    }
    return out;
}

std::vector<PhaseScanRow> phase_scan(std::span<const SpinConfig> states, std::span<const double> phases,
                                     const SidebandConfig &cfg, const CqedSystem &system, bool sigma_average,
                                     int order) {
    if (phases.empty()) {
        domain_error("phase_scan: empty phase grid");
    }
    for (double p : phases) {
        if (!std::isfinite(p)) {
            domain_error("phase_scan: non-finite phase");
        }
    }
    std::vector<ReflectionSet> ens = reflection_ensemble(cfg, system, sigma_average ? order : 0);
    std::vector<PhaseScanRow> rows;
    rows.reserve(phases.size() * states.size());
    for (double p : phases) {
        std::array<double, 4> m1{}, m2{};
        for (const ReflectionSet &r : ens) {
            TransmissionMap t = r.transmission(cfg, p);
            for (int k = 0; k < 4; k++) {
                double t2 = std::norm(t[k]);
                m1[k] += r.weight * t2;
                m2[k] += r.weight * t2 * t2;
            }
        }
        for (SpinConfig s : states) {
            int k = s.index();
            rows.push_back({p, s, m1[k], std::max(0.0, m2[k] - m1[k] * m1[k])});
        }
    }
    return rows;
}

void write_phase_scan_csv(std::ostream &out, std::span<const PhaseScanRow> rows) {
    out << "phase_rad,state,mean_T2,var_T2\n";
    for (const PhaseScanRow &r : rows) {
        out << format_double(r.phase) << ',' << r.state.label() << ',' << format_double(r.mean_t2) << ','
            << format_double(r.var_t2) << '\n';
    }
}

double filter_transmission(double omega, const FilterCavity &filter) {
    double d = std::remainder(omega - filter.omega_0, filter.fsr);
    double x = 2 * d / filter.fwhm;
    return filter.peak_transmission / (1 + x * x);
}

}  // namespace fbh
