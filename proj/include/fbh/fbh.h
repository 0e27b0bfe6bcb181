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

#ifndef FBH_H
#define FBH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(FBH_BUILDING_LIBRARY)
#define FBH_API __declspec(dllexport)
#else
#define FBH_API __declspec(dllimport)
#endif
#else
#define FBH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fbh_status {
    FBH_OK = 0,
    FBH_ERR_DOMAIN = 1,
    FBH_ERR_CONTRACT = 2,
    FBH_ERR_HERALD_IMPOSSIBLE = 3,
    FBH_ERR_NOT_CONVERGED = 4,
    FBH_ERR_RANK_DEFICIENT = 5,
    FBH_ERR_CONFIG = 6,
    FBH_ERR_IO = 7,
    FBH_ERR_INVALID_ARGUMENT = 8,
    FBH_ERR_INTERNAL = 9
} fbh_status;

/* Opaque run configuration. */
typedef struct fbh_config fbh_config;

FBH_API const char *fbh_version(void);
FBH_API const char *fbh_status_name(fbh_status status);
/* Message of the most recent failure on the calling thread; empty when none. */
FBH_API const char *fbh_last_error(void);

FBH_API size_t fbh_preset_count(void);
FBH_API const char *fbh_preset_name(size_t index);

/* preset may be NULL for an all-zero configuration. */
FBH_API fbh_status fbh_config_new(const char *preset, fbh_config **out);
FBH_API fbh_status fbh_config_clone(const fbh_config *cfg, fbh_config **out);
FBH_API void fbh_config_free(fbh_config *cfg);
/* Applies a key = value file on top of cfg and validates the result. */
FBH_API fbh_status fbh_config_load(fbh_config *cfg, const char *path);
/* Applies one "key=value unit" assignment without validating. */
FBH_API fbh_status fbh_config_set(fbh_config *cfg, const char *assignment);
FBH_API fbh_status fbh_config_validate(const fbh_config *cfg);
FBH_API fbh_status fbh_config_dump(const fbh_config *cfg, const char *path);
/* Writes 16 hex digits and a terminator; buf must hold 17 bytes. */
FBH_API fbh_status fbh_config_hash(const fbh_config *cfg, char *buf, size_t len);

typedef struct fbh_phase_scan_summary {
    double optimal_phase;
    /* |T|^2 of up_up, up_down, down_up, down_down relative to up_up at optimal_phase. */
    double ratios[4];
} fbh_phase_scan_summary;

FBH_API fbh_status fbh_phase_scan(const fbh_config *cfg, const char *csv_path, fbh_phase_scan_summary *out);

typedef struct fbh_budget_summary {
    double fidelity_mean;
    double fidelity_min;
    double fidelity_max;
    double total_expected;
    double sum_of_rows;
    /* Mean marginal error per source, in the order of fbh_error_source_name. */
    double marginal[8];
    double marginal_std[8];
    size_t warnings;
} fbh_budget_summary;

FBH_API const char *fbh_error_source_name(size_t index);
FBH_API fbh_status fbh_error_budget(const fbh_config *cfg, int threads, const char *csv_path,
                                    fbh_budget_summary *out);

typedef struct fbh_fidelity_summary {
    double fidelity;
    double fidelity_stderr;
    double concurrence_bound;
} fbh_fidelity_summary;

/* Model-predicted correlation bars averaged over the microwave-phase sweep. */
FBH_API fbh_status fbh_predicted_correlations(const fbh_config *cfg, int threads, const char *csv_path,
                                              fbh_fidelity_summary *out);

typedef struct fbh_simulation_summary {
    uint64_t trials;
    uint64_t heralds;
    uint64_t postselected;
    double herald_probability;
    double herald_rate;
    double fidelity;
    double fidelity_stderr;
    double concurrence_bound;
} fbh_simulation_summary;

/* Monte Carlo of the heralded protocol. correlations_path may be NULL. */
FBH_API fbh_status fbh_simulate(const fbh_config *cfg, uint64_t seed, int threads, const char *trials_path,
                                const char *correlations_path, fbh_simulation_summary *out);
FBH_API fbh_status fbh_jump_trace(const fbh_config *cfg, uint64_t seed, const char *csv_path);

typedef enum fbh_preparation {
    FBH_PREP_MIXED = 0,
    FBH_PREP_UP_UP = 1,
    FBH_PREP_UP_DOWN = 2,
    FBH_PREP_DOWN_UP = 3,
    FBH_PREP_DOWN_DOWN = 4
} fbh_preparation;

/* Poisson scan from the configuration's spectroscopy model. The grid spans [start_hz, stop_hz] relative to
   the cavity resonance; the CSV holds absolute frequencies. */
FBH_API fbh_status fbh_synthetic_scan(const fbh_config *cfg, uint64_t seed, fbh_preparation prep, double start_hz,
                                      double stop_hz, size_t points, double exposure, const char *csv_path);

typedef struct fbh_fit_summary {
    int converged;
    int iterations;
    size_t trimmed_points;
    double reduced_chi2;
    double residual_norm;
    double gradient_norm;
} fbh_fit_summary;

/* Joint fit of scan CSV files (freq_hz,counts). free_params is a comma-separated list or NULL for the
   default set; method 0 selects Levenberg-Marquardt and 1 Nelder-Mead. */
FBH_API fbh_status fbh_fit_scans(const fbh_config *cfg, const char *const *paths, const fbh_preparation *preps,
                                 const double *exposures, size_t count, const char *free_params, int method,
                                 const char *report_path, fbh_fit_summary *out);

typedef struct fbh_detuning_design {
    double cooperativity;
    double delta_a;
    double delta_c;
    double delta;
    double delta_approx;
    double bandwidth;
} fbh_detuning_design;

/* Optimal detunings for one emitter (0 = A, 1 = B) of cfg and the contrast bandwidth, all in rad/s. */
FBH_API fbh_status fbh_design_detuning(const fbh_config *cfg, int emitter, double contrast,
                                       fbh_detuning_design *out);

#ifdef __cplusplus
}
#endif

#endif
