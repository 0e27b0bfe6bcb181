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

#include "fbh/spin_register.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "fbh/errors.hpp"
#include "fbh/units.hpp"

namespace fbh {

namespace {

const cplx I(0, 1);

Matrix2c expm_hermitian(const Matrix2c &h) {
    Eigen::SelfAdjointEigenSolver<Matrix2c> eig(h);
    Eigen::Vector2cd phases;
    for (int k = 0; k < 2; k++) {
        phases(k) = std::exp(-I * eig.eigenvalues()(k));
    }
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

Matrix2c rz(double angle) {
    Matrix2c u = Matrix2c::Zero();
    u(0, 0) = std::exp(-I * (0.5 * angle));
    u(1, 1) = std::exp(I * (0.5 * angle));
    return u;
}

TwoQubitState unchecked(const Matrix4c &rho) { return TwoQubitState(rho, false); }

// Logical product basis vectors for one qubit in the given basis; index 0 is the "+" or "up" outcome.
std::array<Eigen::Vector2cd, 2> basis_vectors(Basis basis) {
    double s = 1 / std::sqrt(2.0);
    switch (basis) {
        case Basis::XX:
            return {Eigen::Vector2cd(s, s), Eigen::Vector2cd(s, -s)};
        case Basis::YY:
            return {Eigen::Vector2cd(s, I * s), Eigen::Vector2cd(s, -I * s)};
        case Basis::ZZ:
            break;
    }
    return {Eigen::Vector2cd(1, 0), Eigen::Vector2cd(0, 1)};
}

Vector4c kron(const Eigen::Vector2cd &a, const Eigen::Vector2cd &b) {
    Vector4c v;
    v << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
    return v;
}

Matrix4c kron(const Matrix2c &a, const Matrix2c &b) {
    Matrix4c m;
    for (int i = 0; i < 2; i++) {
        for (int j = 0; j < 2; j++) {
            m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        }
    }
    return m;
}

}  // namespace

const char *basis_name(Basis b) {
    switch (b) {
        case Basis::XX:
            return "XX";
        case Basis::YY:
            return "YY";
        case Basis::ZZ:
            return "ZZ";
    }
    return "?";
}

double axis_phase(Axis axis) {
    switch (axis) {
        case Axis::X:
            return 0;
        case Axis::Y:
            return 0.5 * kPi;
        case Axis::minus_X:
            return kPi;
        case Axis::minus_Y:
            return -0.5 * kPi;
    }
    return 0;
}

TwoQubitState::TwoQubitState() : rho_(Matrix4c::Zero()) { rho_(0, 0) = 1; }

TwoQubitState::TwoQubitState(const Matrix4c &rho, bool check) : rho_(rho) {
    if (check) {
        validate();
    }
}

TwoQubitState TwoQubitState::pure(const Vector4c &psi) {
    double n = psi.norm();
    if (!(n > 0)) {
        domain_error("pure state needs a nonzero vector");
    }
    Vector4c v = psi / n;
    return TwoQubitState(v * v.adjoint());
}

TwoQubitState TwoQubitState::basis(SpinConfig s) {
    Matrix4c rho = Matrix4c::Zero();
    rho(s.index(), s.index()) = 1;
    return TwoQubitState(rho);
}

TwoQubitState TwoQubitState::maximally_mixed() { return TwoQubitState(Matrix4c::Identity() * 0.25); }

TwoQubitState TwoQubitState::psi_plus() { return pure(psi_plus_vector()); }

Vector4c psi_plus_vector() {
    double s = 1 / std::sqrt(2.0);
    return Vector4c(0, s, s, 0);
}

void TwoQubitState::validate() const {
    if (!rho_.allFinite()) {
        contract_error("density matrix has non-finite entries");
    }
    double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    if (herm >= kHermiticityTol) {
        contract_error("density matrix is not Hermitian (max deviation " + std::to_string(herm) + ")");
    }
    double tr = rho_.trace().real();
    if (std::abs(tr - 1) >= kTraceTol) {
        contract_error("density matrix trace is " + std::to_string(tr));
    }
    double lo = min_eigenvalue();
    if (lo <= -kPositivityTol) {
        contract_error("density matrix has negative eigenvalue " + std::to_string(lo));
    }
}

double TwoQubitState::min_eigenvalue() const {
    Matrix4c h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix4c> eig(h, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

double TwoQubitState::fidelity(const Vector4c &psi) const { return (psi.adjoint() * rho_ * psi)(0, 0).real(); }

std::array<double, 4> TwoQubitState::populations() const {
    return {rho_(0, 0).real(), rho_(1, 1).real(), rho_(2, 2).real(), rho_(3, 3).real()};
}

Matrix2c pauli_x() {
    Matrix2c m;
    m << 0, 1, 1, 0;
    return m;
}

Matrix2c pauli_y() {
    Matrix2c m;
    m << 0, -I, I, 0;
    return m;
}

Matrix2c pauli_z() {
    Matrix2c m;
    m << 1, 0, 0, -1;
    return m;
}

Matrix4c on_qubit(Qubit q, const Matrix2c &u) {
    return q == Qubit::A ? kron(u, Matrix2c::Identity()) : kron(Matrix2c::Identity(), u);
}

Matrix2c rotation_unitary(const PulseSpec &pulse) {
    if (!std::isfinite(pulse.angle) || !(pulse.duration >= 0)) {
        contract_error("pulse needs finite angle and duration >= 0");
    }
    double phi = axis_phase(pulse.axis) + pulse.phase_offset;
    double theta = (1 + pulse.rabi_error) * pulse.angle;
    Matrix2c h = 0.5 * theta * (std::cos(phi) * pauli_x() + std::sin(phi) * pauli_y());
    if (pulse.duration > 0) {
        h += 0.5 * pulse.detuning * pulse.duration * pauli_z();
    }
    return expm_hermitian(h);
}

Matrix2c offresonant_unitary(double rabi, double phase, double drive_offset, double qubit_detuning, double t0,
                             double duration) {
    if (!(duration >= 0)) {
        contract_error("off-resonant drive needs duration >= 0");
    }
    // Move to the frame co-rotating with the drive, where the Hamiltonian is static.
    double phi = phase + drive_offset * t0;
    Matrix2c h = 0.5 * duration *
                 ((qubit_detuning - drive_offset) * pauli_z() +
                  rabi * (std::cos(phi) * pauli_x() + std::sin(phi) * pauli_y()));
    return rz(drive_offset * duration) * expm_hermitian(h);
}

TwoQubitState apply_unitary(const TwoQubitState &state, const Matrix4c &u) {
    return unchecked(u * state.rho() * u.adjoint());
}

TwoQubitState apply_rotation(const TwoQubitState &state, const PulseSpec &pulse) {
    state.validate();
    return apply_unitary(state, on_qubit(pulse.target, rotation_unitary(pulse)));
}

TwoQubitState apply_dephasing(const TwoQubitState &state, Qubit target, double p) {
    if (!(p >= 0 && p <= 1)) {
        domain_error("apply_dephasing: p must lie in [0, 1]");
    }
    Matrix4c z = on_qubit(target, pauli_z());
    return unchecked((1 - p) * state.rho() + p * z * state.rho() * z);
}

HeraldedState heralded_projection(const TwoQubitState &state, const TransmissionMap &t_map) {
    Matrix4c out;
    for (int i = 0; i < 4; i++) {
        for (int j = 0; j < 4; j++) {
            out(i, j) = t_map[i] * state(i, j) * std::conj(t_map[j]);
        }
    }
    double w = out.trace().real();
    if (!(w > 0)) {
        throw Error(ErrorCode::herald_impossible, "heralded_projection: zero success weight");
    }
    return {unchecked(out / w), w};
}

Matrix4c herald_kernel(std::span<const TransmissionMap> maps, std::span<const double> weights) {
    if (maps.size() != weights.size()) {
        domain_error("herald_kernel: maps and weights differ in length");
    }
    Matrix4c k = Matrix4c::Zero();
    for (size_t n = 0; n < maps.size(); n++) {
        Vector4c t(maps[n][0], maps[n][1], maps[n][2], maps[n][3]);
        k += weights[n] * t * t.adjoint();
    }
    return k;
}

HeraldedState heralded_projection_kernel(const TwoQubitState &state, const Matrix4c &kernel) {
    Matrix4c out = state.rho().cwiseProduct(kernel);
    double w = out.trace().real();
    if (!(w > 0)) {
        throw Error(ErrorCode::herald_impossible, "heralded_projection: zero success weight");
    }
    return {unchecked(out / w), w};
}

TwoQubitState two_photon_dephasing(const TwoQubitState &state, double n_mean) {
    if (!(n_mean >= 0)) {
        domain_error("two_photon_dephasing: n_mean must be >= 0");
    }
    double p = std::min(0.5 * n_mean, 0.5);
    return apply_dephasing(apply_dephasing(state, Qubit::A, p), Qubit::B, p);
}

std::array<double, 4> measure_correlations(const TwoQubitState &state, Basis basis) {
    auto v = basis_vectors(basis);
    std::array<double, 4> p{};
    for (int a = 0; a < 2; a++) {
        for (int b = 0; b < 2; b++) {
            Vector4c e = kron(v[a], v[b]);
            p[2 * a + b] = std::max(0.0, (e.adjoint() * state.rho() * e)(0, 0).real());
        }
    }
    return p;
}

EchoTiming EchoTiming::supplementary() { return EchoTiming{}; }

EchoTiming EchoTiming::main_text() {
    EchoTiming t;
    t.wait1 = 387e-9;
    t.wait2 = 373e-9;
    return t;
}

double EchoTiming::tau_a() const { return pi2_a + pi2_b + wait1; }

double EchoTiming::tau_b() const { return pi2_b + wait1 + pi_a; }

void EchoTiming::validate() const {
    for (double v : {pi2_a, pi2_b, wait1, pi_a, pi_b, wait2, wait3, probe_delay, probe_length}) {
        if (!(v >= 0) || !std::isfinite(v)) {
            domain_error("echo timing: delays and durations must be finite and >= 0");
        }
    }
    if (probe_delay + probe_length > wait1) {
        domain_error("echo timing: probe window must end before the pi pulses");
    }
}

double EchoSequence::probe_start() const { return timing.pi2_a + timing.pi2_b + timing.probe_delay; }

double EchoSequence::pi_start() const { return timing.pi2_a + timing.pi2_b + timing.wait1; }

std::vector<TimedPulse> EchoSequence::pulses() const {
    const EchoTiming &t = timing;
    std::vector<TimedPulse> out;
    auto add = [&](Qubit q, Axis axis, double angle, double duration, double start) {
        PulseSpec p;
        p.target = q;
        p.axis = axis;
        p.angle = angle;
        p.duration = duration;
        out.push_back({p, start});
    };
    add(Qubit::A, Axis::Y, 0.5 * kPi, t.pi2_a, 0);
    add(Qubit::B, Axis::Y, 0.5 * kPi, t.pi2_b, t.pi2_a);
    double t_pi = pi_start();
    add(Qubit::A, Axis::X, kPi, t.pi_a, t_pi);
    add(Qubit::B, Axis::X, kPi, t.pi_b, t_pi + t.pi_a);
    if (basis != Basis::ZZ) {
        Axis fin = basis == Basis::XX ? Axis::minus_Y : Axis::X;
        double t_fin = t_pi + t.pi_a + t.pi_b + t.wait2;
        add(Qubit::A, fin, 0.5 * kPi, t.pi2_a, t_fin);
        add(Qubit::B, fin, 0.5 * kPi, t.pi2_b, t_fin + t.pi2_a + t.wait3);
    }
    return out;
}

namespace {

struct Timeline {
    const EchoNoise &noise;
    TwoQubitState state;
    double now = 0;

    const QubitErrors &errors(Qubit q) const { return q == Qubit::A ? noise.a : noise.b; }
    double frame_phase(Qubit q) const { return q == Qubit::A ? 0.0 : noise.mw_phase_b; }

    void free_evolve(double until) {
        double dt = until - now;
        if (dt > 0 && (noise.a.detuning != 0 || noise.b.detuning != 0)) {
            Matrix4c u = kron(rz(noise.a.detuning * dt), rz(noise.b.detuning * dt));
            state = apply_unitary(state, u);
        }
        now = std::max(now, until);
    }

    void pulse(const TimedPulse &tp, bool final_pulse) {
        free_evolve(tp.start);
        Qubit q = tp.pulse.target;
        Qubit o = q == Qubit::A ? Qubit::B : Qubit::A;
        PulseSpec p = tp.pulse;
        p.rabi_error = errors(q).rabi_error;
        p.detuning = errors(q).detuning;
        p.phase_offset += frame_phase(q);
        if (final_pulse) {
            p.phase_offset += errors(q).readout_tilt;
        }
        Matrix2c uq = rotation_unitary(p);
        Matrix2c uo = rz(errors(o).detuning * p.duration);
        const CrosstalkSpec &x = noise.crosstalk;
        if (x.enabled && x.ratio != 0 && p.duration > 0) {
            double rabi = x.ratio * (1 + p.rabi_error) * p.angle / p.duration;
            double zq = q == Qubit::A ? x.zeeman_a : x.zeeman_b;
            double zo = q == Qubit::A ? x.zeeman_b : x.zeeman_a;
            double phase = axis_phase(p.axis) + tp.pulse.phase_offset + frame_phase(q);
            uo = offresonant_unitary(rabi, phase, zq - zo, errors(o).detuning, tp.start, p.duration);
        }
        Matrix4c u = q == Qubit::A ? kron(uq, uo) : kron(uo, uq);
        state = apply_unitary(state, u);
        now = tp.start + p.duration;
    }
};

double half_channel(double p) { return 0.5 * (1 - std::sqrt(std::max(0.0, 1 - 2 * p))); }

}  // namespace

EchoRunner::EchoRunner(const EchoSequence &seq, const EchoNoise &noise) : seq_(seq), noise_(noise) {
    seq_.timing.validate();
    for (double p : {noise.dephasing_a, noise.dephasing_b}) {
        if (!(p >= 0 && p <= 0.5)) {
            domain_error("echo noise: dephasing probabilities must lie in [0, 0.5]");
        }
    }
    pulses_ = seq_.pulses();
}

TwoQubitState EchoRunner::before_probe(const TwoQubitState &initial) const {
    Timeline tl{noise_, initial};
    tl.pulse(pulses_[0], false);
    tl.pulse(pulses_[1], false);
    tl.free_evolve(seq_.probe_start());
    return tl.state;
}

TwoQubitState EchoRunner::after_probe(const TwoQubitState &state) const {
    Timeline tl{noise_, state, seq_.probe_start()};
    double qa = half_channel(noise_.dephasing_a);
    double qb = half_channel(noise_.dephasing_b);
    auto dephase = [&] {
        tl.state = apply_dephasing(tl.state, Qubit::A, qa);
        tl.state = apply_dephasing(tl.state, Qubit::B, qb);
    };
    dephase();
    tl.pulse(pulses_[2], false);
    tl.pulse(pulses_[3], false);
    dephase();
    for (size_t i = 4; i < pulses_.size(); i++) {
        tl.pulse(pulses_[i], true);
    }
    return tl.state;
}

EchoResult run_echo_sequence(const TwoQubitState &initial, const EchoSequence &seq, const EchoNoise &noise,
                             const std::optional<ProbeSpec> &probe) {
    initial.validate();
    EchoRunner runner(seq, noise);
    TwoQubitState mid = runner.before_probe(initial);
    EchoResult result{mid, std::nullopt};
    if (probe) {
        HeraldedState h = heralded_projection_kernel(mid, probe->kernel);
        mid = two_photon_dephasing(h.state, probe->n_mean);
        result.success_weight = h.success_weight;
    }
    result.state = runner.after_probe(mid);
    return result;
}

std::array<int, 4> outcome_labels(const EchoSequence &seq) {
    std::vector<TimedPulse> pulses = seq.pulses();
    Matrix4c u = Matrix4c::Identity();
    for (size_t i = 2; i < pulses.size(); i++) {
        u = on_qubit(pulses[i].pulse.target, rotation_unitary(pulses[i].pulse)) * u;
    }
    auto v = basis_vectors(seq.basis);
    std::array<int, 4> labels{};
    for (int k = 0; k < 4; k++) {
        Vector4c e = u.adjoint().col(k);
        int best = 0;
        double best_overlap = -1;
        for (int l = 0; l < 4; l++) {
            double ov = std::norm(kron(v[l / 2], v[l % 2]).dot(e));
            if (ov > best_overlap) {
                best_overlap = ov;
                best = l;
            }
        }
        labels[k] = best;
    }
    return labels;
}

std::array<double, 4> sequence_correlations(const TwoQubitState &final_state, const EchoSequence &seq) {
    std::array<int, 4> labels = outcome_labels(seq);
    std::array<double, 4> pops = final_state.populations();
    std::array<double, 4> out{};
    for (int k = 0; k < 4; k++) {
        out[labels[k]] += std::max(0.0, pops[k]);
    }
    return out;
}

}  // namespace fbh
