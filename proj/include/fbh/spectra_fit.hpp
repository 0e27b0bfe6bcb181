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
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fbh/cqed.hpp"
#include "fbh/errors.hpp"

namespace fbh {

// Sinusoidal input-power ripple versus laser frequency: 1 + amplitude sin(2 pi (w - w_c)/period + phase).
struct PowerModulation {
    double amplitude = 0;
    double period = 1;
    double phase = 0;
};

struct ScanModel {
    CqedSystem system;
    PowerModulation modulation;
    double background = 0;
    double scale = 1;
    // Probability that each emitter is found in the prepared spin state.
    double init_fidelity_a = 1;
    double init_fidelity_b = 1;
    int order = 11;

    void validate() const;
};

struct Preparation {
    bool unpolarized = true;
    SpinConfig state;

    static Preparation mixed() { return {true, {}}; }
    static Preparation spins(SpinConfig s) { return {false, s}; }
};

std::vector<double> simulate_scan(const ScanModel &model, std::span<const double> freqs, Preparation prep);

std::vector<double> shot_noise_weights(std::span<const double> counts);

struct ScanDataset {
    std::vector<double> freq;
    std::vector<double> counts;
    std::vector<double> weight;
    // Nonzero entries are left out of the fit.
    std::vector<char> excluded;
    Preparation prep;
    // Relative integration time; the expected counts are exposure * simulate_scan.
    double exposure = 1;

    void validate() const;
    size_t active_points() const;
};

// Poisson sample of simulate_scan with shot-noise weights attached.
ScanDataset synthetic_scan(const ScanModel &model, std::span<const double> freqs, Preparation prep,
                           std::mt19937_64 &rng, double exposure = 1);

// Marks points within `half_width` of any emitter line.
void exclude_near_lines(ScanDataset &data, const CqedSystem &system, double half_width);

enum class FitParam {
    g_a,
    gamma_a,
    sigma_a,
    omega_a,
    g_b,
    gamma_b,
    sigma_b,
    omega_b,
    kappa_w,
    kappa_l,
    omega_c,
    scale,
    background,
    mod_amplitude,
    mod_phase,
};

inline constexpr int kFitParamCount = 15;

const char *fit_param_name(FitParam p);
FitParam parse_fit_param(const std::string &name);
// omega_a and omega_b move both spin lines of the emitter together.
double get_param(const ScanModel &m, FitParam p);
void set_param(ScanModel &m, FitParam p, double v);

struct FreeMask {
    std::array<bool, kFitParamCount> free{};

    bool operator[](FitParam p) const { return free[static_cast<int>(p)]; }
    FreeMask &set(FitParam p, bool on = true);
    int count() const;
};

enum class FitMethod { levenberg_marquardt, nelder_mead };

struct FitOptions {
    FitMethod method = FitMethod::levenberg_marquardt;
    int max_iterations = 200;
    double tolerance = 1e-10;
    double center_weight = 5;
    // Half width of the boosted window around the cavity; <= 0 means kappa_tot / 4.
    double center_half_width = 0;
    bool robust_trim = true;
    double trim_sigma = 4;
};

struct FitResult {
    ScanModel model;
    std::array<double, kFitParamCount> value{};
    std::array<double, kFitParamCount> stderr_{};
    FreeMask mask;
    double residual_norm = 0;
    double reduced_chi2 = 0;
    int iterations = 0;
    int evaluations = 0;
    double gradient_norm = 0;
    size_t trimmed_points = 0;
    bool converged = false;
    std::vector<double> residual_history;
};

class FitError : public Error {
   public:
    FitError(ErrorCode code, const std::string &what, FitResult best) : Error(code, what), best_(std::move(best)) {}
    const FitResult &best_so_far() const { return best_; }

   private:
    FitResult best_;
};

FitResult fit_scans(std::span<const ScanDataset> data, const ScanModel &model0, const FreeMask &mask,
                    const FitOptions &options = {});
FitResult fit_scan(const ScanDataset &data, const ScanModel &model0, const FreeMask &mask,
                   const FitOptions &options = {});

// Weighted residuals sqrt(w_i) (counts_i - model_i) over non-excluded points, center boost included.
std::vector<double> weighted_residuals(std::span<const ScanDataset> data, const ScanModel &model,
                                       const FitOptions &options);

// Jacobian of weighted_residuals with respect to the free parameters in SI units, one row per residual and
// one column per free parameter in FitParam order. This is the matrix the optimizer differentiates.
std::vector<std::vector<double>> residual_jacobian(std::span<const ScanDataset> data, const ScanModel &model,
                                                   const FreeMask &mask, const FitOptions &options = {});

ScanDataset read_scan_csv(std::istream &in, Preparation prep);
void write_fit_report(std::ostream &out, const FitResult &r);

}  // namespace fbh
