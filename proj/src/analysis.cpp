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

#include "fbh/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "fbh/errors.hpp"

namespace fbh {

double BasisCorrelation::binomial_error(int k) const {
    if (shots <= 0) {
        return 0;
    }
    return std::sqrt(std::max(0.0, p[k] * (1 - p[k])) / shots);
}

void CorrelationData::set(Basis b, const std::array<double, 4> &p, double shots) {
    BasisCorrelation &c = (*this)[b];
    c.present = true;
    c.p = p;
    c.shots = shots;
}

void CorrelationData::set_counts(Basis b, const std::array<long, 4> &counts) {
    long n = counts[0] + counts[1] + counts[2] + counts[3];
    std::array<double, 4> p{};
    if (n > 0) {
        for (int k = 0; k < 4; k++) {
            p[k] = double(counts[k]) / double(n);
        }
    }
    set(b, p, double(n));
    (*this)[b].present = n > 0;
}

CorrelationData CorrelationData::exact(const TwoQubitState &state) {
    CorrelationData d;
    for (Basis b : {Basis::XX, Basis::YY, Basis::ZZ}) {
        d.set(b, measure_correlations(state, b));
    }
    return d;
}

namespace {

void require_all(const CorrelationData &data, const char *who) {
    for (Basis b : {Basis::XX, Basis::YY, Basis::ZZ}) {
        if (!data[b].present) {
            domain_error(std::string(who) + ": missing " + basis_name(b) + " correlations");
        }
    }
}

// Variance of an estimate sum_k c_k p_k from a multinomial sample of size n.
double multinomial_variance(const BasisCorrelation &c, const std::array<double, 4> &coef) {
    if (c.shots <= 0) {
        return 0;
    }
    double mean = 0, second = 0;
    for (int k = 0; k < 4; k++) {
        mean += coef[k] * c.p[k];
        second += coef[k] * coef[k] * c.p[k];
    }
    return std::max(0.0, second - mean * mean) / c.shots;
}

}  // namespace

Estimate bell_fidelity(const CorrelationData &data) {
    require_all(data, "bell_fidelity");
    const BasisCorrelation &xx = data[Basis::XX];
    const BasisCorrelation &yy = data[Basis::YY];
    const BasisCorrelation &zz = data[Basis::ZZ];
    Estimate f;
    f.value = (2 * zz.p[1] + 2 * zz.p[2] + xx.contrast() + yy.contrast()) / 4;
    std::array<double, 4> parity = {0.25, -0.25, -0.25, 0.25};
    std::array<double, 4> odd = {0, 0.5, 0.5, 0};
    double var = multinomial_variance(xx, parity) + multinomial_variance(yy, parity) + multinomial_variance(zz, odd);
    f.stderr_ = std::sqrt(var);
    return f;
}

double concurrence_lower_bound(const CorrelationData &data) {
    require_all(data, "concurrence_lower_bound");
    const BasisCorrelation &zz = data[Basis::ZZ];
    double coherence = (data[Basis::XX].contrast() + data[Basis::YY].contrast()) / 4;
    return 2 * std::max(0.0, coherence - std::sqrt(std::max(0.0, zz.p[0] * zz.p[3])));
}

double wootters_concurrence(const TwoQubitState &state) {
    Matrix4c yy = on_qubit(Qubit::A, pauli_y()) * on_qubit(Qubit::B, pauli_y());
    Matrix4c rho = 0.5 * (state.rho() + state.rho().adjoint());
    Matrix4c tilde = yy * rho.conjugate() * yy;
    // Eigenvalues of rho tilde equal those of sqrt(rho) tilde sqrt(rho), which is Hermitian.
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Matrix4c sq = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    Matrix4c r = sq * tilde * sq;
    Eigen::SelfAdjointEigenSolver<Matrix4c> er(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
    std::array<double, 4> lam;
    for (int k = 0; k < 4; k++) {
        lam[k] = std::sqrt(std::max(0.0, er.eigenvalues()(k)));
    }
    std::sort(lam.begin(), lam.end(), std::greater<>());
    return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

}  // namespace fbh
