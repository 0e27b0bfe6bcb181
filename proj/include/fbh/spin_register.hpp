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

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "fbh/cqed.hpp"
#include "fbh/interferometer.hpp"

namespace fbh {

using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

enum class Qubit { A, B };
enum class Axis { X, Y, minus_X, minus_Y };
enum class Basis { XX, YY, ZZ };

const char *basis_name(Basis b);
double axis_phase(Axis axis);

inline constexpr double kHermiticityTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPositivityTol = 1e-10;

// Density matrix over {up-up, up-down, down-up, down-down}; index 0 of each qubit is spin up.
class TwoQubitState {
   public:
    TwoQubitState();
    explicit TwoQubitState(const Matrix4c &rho, bool check = true);

    static TwoQubitState pure(const Vector4c &psi);
    static TwoQubitState basis(SpinConfig s);
    static TwoQubitState maximally_mixed();
    // (|up,down> + |down,up>) / sqrt(2).
    static TwoQubitState psi_plus();

    const Matrix4c &rho() const { return rho_; }
    std::complex<double> operator()(int i, int j) const { return rho_(i, j); }

    // Throws contract error naming the first broken invariant.
    void validate() const;
    double min_eigenvalue() const;
    double fidelity(const Vector4c &psi) const;
    std::array<double, 4> populations() const;

   private:
    Matrix4c rho_;
};

Vector4c psi_plus_vector();

Matrix2c pauli_x();
Matrix2c pauli_y();
Matrix2c pauli_z();
Matrix4c on_qubit(Qubit q, const Matrix2c &u);

struct PulseSpec {
    Qubit target = Qubit::A;
    Axis axis = Axis::X;
    double angle = 0;
    double duration = 0;
    double rabi_error = 0;
    double detuning = 0;
    double phase_offset = 0;
};

// Single-qubit unitary of a square Rabi pulse in the frame of the qubit:
// H = detuning/2 Z + (1 + rabi_error) angle/(2 duration) (cos phi X + sin phi Y); zero duration is instantaneous.
Matrix2c rotation_unitary(const PulseSpec &pulse);

// Drive H(t) = qubit_detuning/2 Z + rabi/2 (cos(drive_offset t + phase) X + sin(drive_offset t + phase) Y)
// in the qubit frame, applied over [t0, t0 + duration].
Matrix2c offresonant_unitary(double rabi, double phase, double drive_offset, double qubit_detuning, double t0,
                             double duration);

TwoQubitState apply_unitary(const TwoQubitState &state, const Matrix4c &u);
TwoQubitState apply_rotation(const TwoQubitState &state, const PulseSpec &pulse);
TwoQubitState apply_dephasing(const TwoQubitState &state, Qubit target, double p);

struct HeraldedState {
    TwoQubitState state;
    double success_weight;
};

HeraldedState heralded_projection(const TwoQubitState &state, const TransmissionMap &t_map);

// Diffusion-averaged herald: rho -> (rho o K) / tr with K = sum_n w_n t_n t_n^dagger.
Matrix4c herald_kernel(std::span<const TransmissionMap> maps, std::span<const double> weights);
HeraldedState heralded_projection_kernel(const TwoQubitState &state, const Matrix4c &kernel);

// Phase flip with probability n_mean/2 on each qubit.
TwoQubitState two_photon_dephasing(const TwoQubitState &state, double n_mean);

std::array<double, 4> measure_correlations(const TwoQubitState &state, Basis basis);

// One microwave or wait step of an echo sequence, with absolute start time.
struct TimedPulse {
    PulseSpec pulse;
    double start;
};

// Microwave leakage onto the other qubit: a pulse on A also drives B off-resonantly and vice versa.
struct CrosstalkSpec {
    bool enabled = false;
    double ratio = 0;
    double zeeman_a = 0;
    double zeeman_b = 0;
};

struct EchoTiming {
    double pi2_a = 11e-9;
    double pi2_b = 14e-9;
    double wait1 = 401e-9;
    double pi_a = 22e-9;
    double pi_b = 28e-9;
    double wait2 = 387e-9;
    double wait3 = 25e-9;
    double probe_delay = 100e-9;
    double probe_length = 200e-9;

    static EchoTiming supplementary();
    static EchoTiming main_text();
    double tau_a() const;
    double tau_b() const;
    void validate() const;
};

struct QubitErrors {
    double rabi_error = 0;
    double detuning = 0;
    double readout_tilt = 0;
};

struct EchoNoise {
    double dephasing_a = 0;
    double dephasing_b = 0;
    QubitErrors a;
    QubitErrors b;
    CrosstalkSpec crosstalk;
    double mw_phase_b = 0;
};

struct ProbeSpec {
    Matrix4c kernel;
    double n_mean = 0;
};

struct EchoSequence {
    EchoTiming timing;
    Basis basis = Basis::ZZ;

    // Pulse list for the given readout basis; pulses carry only nominal parameters.
    std::vector<TimedPulse> pulses() const;
    double probe_start() const;
    double pi_start() const;
};

struct EchoResult {
    TwoQubitState state;
    std::optional<double> success_weight;
};

// Splits a sequence at the probe window so callers can branch on a herald record.
// Decoherence is applied as two half-strength phase flips, one on each side of the pi pulses.
class EchoRunner {
   public:
    EchoRunner(const EchoSequence &seq, const EchoNoise &noise);
    TwoQubitState before_probe(const TwoQubitState &initial) const;
    TwoQubitState after_probe(const TwoQubitState &state) const;

   private:
    EchoSequence seq_;
    EchoNoise noise_;
    std::vector<TimedPulse> pulses_;
};

EchoResult run_echo_sequence(const TwoQubitState &initial, const EchoSequence &seq, const EchoNoise &noise,
                             const std::optional<ProbeSpec> &probe = std::nullopt);

// Probabilities of logical outcome pairs (same order as measure_correlations) after the sequence's final
// readout, using the ideal sequence to label each computational-basis outcome.
std::array<double, 4> sequence_correlations(const TwoQubitState &final_state, const EchoSequence &seq);

// Computational outcome index -> logical outcome index in the sequence's basis.
std::array<int, 4> outcome_labels(const EchoSequence &seq);

}  // namespace fbh
