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


#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "fbh/analysis.hpp"
#include "fbh/errors.hpp"
#include "random_states.hpp"

using namespace fbh;
using fbh::testing::random_state;

namespace {

// Wootters concurrence from the non-Hermitian product rho (Y x Y) rho* (Y x Y).
double wootters_oracle(const Matrix4c &rho) {
    Matrix4c yy = on_qubit(Qubit::A, pauli_y()) * on_qubit(Qubit::B, pauli_y());
    Matrix4c m = rho * yy * rho.conjugate() * yy;
    Eigen::ComplexEigenSolver<Matrix4c> es(m);
    std::array<double, 4> lam;
    for (int k = 0; k < 4; k++) {
        lam[k] = std::sqrt(std::max(0.0, es.eigenvalues()(k).real()));
    }
    std::sort(lam.begin(), lam.end(), std::greater<>());
    return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

TwoQubitState werner(double p) {
    Matrix4c bell = psi_plus_vector() * psi_plus_vector().adjoint();
    return TwoQubitState(p * bell + (1 - p) * 0.25 * Matrix4c::Identity());
}

}  // namespace

TEST_CASE("bell fidelity of reference states") {
    CHECK(bell_fidelity(CorrelationData::exact(TwoQubitState::psi_plus())).value == doctest::Approx(1).epsilon(1e-15));
    CHECK(bell_fidelity(CorrelationData::exact(TwoQubitState::maximally_mixed())).value == doctest::Approx(0.25));
    // Fidelity from correlations equals <Psi+|rho|Psi+> for any state.
    std::mt19937_64 rng(29);
    for (int k = 0; k < 1000; k++) {
        TwoQubitState s = random_state(rng, 1 + k % 4);
        CHECK(bell_fidelity(CorrelationData::exact(s)).value ==
              doctest::Approx(s.fidelity(psi_plus_vector())).epsilon(1e-12));
    }
}

TEST_CASE("bell fidelity errors") {
    CorrelationData d;
    d.set_counts(Basis::XX, {40, 10, 10, 40});
    d.set_counts(Basis::YY, {40, 10, 10, 40});
    CHECK_THROWS_AS(bell_fidelity(d), Error);
    d.set_counts(Basis::ZZ, {5, 45, 45, 5});
    Estimate f = bell_fidelity(d);
    CHECK(f.value == doctest::Approx((2 * 0.9 + 0.6 + 0.6) / 4));
    // Each basis term is a multinomial mean; variances add.
    double vx = (0.0625 * 1.0 - 0.15 * 0.15) / 100;
    double vz = (0.25 * 0.9 - 0.45 * 0.45) / 100;
    CHECK(f.stderr_ == doctest::Approx(std::sqrt(2 * vx + vz)).epsilon(1e-12));
    CHECK(d[Basis::ZZ].binomial_error(1) == doctest::Approx(std::sqrt(0.45 * 0.55 / 100)));
}

TEST_CASE("concurrence bound on reference states") {
    CHECK(concurrence_lower_bound(CorrelationData::exact(TwoQubitState::psi_plus())) ==
          doctest::Approx(1).epsilon(1e-14));
    CHECK(concurrence_lower_bound(CorrelationData::exact(TwoQubitState::basis({Spin::up, Spin::down}))) == 0);
}

TEST_CASE("wootters concurrence on reference states") {
    CHECK(wootters_concurrence(TwoQubitState::psi_plus()) == doctest::Approx(1).epsilon(1e-12));
    std::mt19937_64 rng(31);
    for (int k = 0; k < 200; k++) {
        Eigen::Vector2cd a = fbh::testing::random_vector(rng).head<2>().normalized();
        Eigen::Vector2cd b = fbh::testing::random_vector(rng).head<2>().normalized();
        Vector4c v;
        v << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
        CHECK(wootters_concurrence(TwoQubitState::pure(v)) < 1e-7);
    }
}

TEST_CASE("werner states follow the closed form") {
    for (double p = 0; p <= 1.0001; p += 0.05) {
        double expected = std::max(0.0, (3 * p - 1) / 2);
        TwoQubitState w = werner(std::min(p, 1.0));
        CHECK(wootters_concurrence(w) == doctest::Approx(expected).epsilon(1e-10));
        CHECK(wootters_oracle(w.rho()) == doctest::Approx(expected).epsilon(1e-7));
    }
}

TEST_CASE("wootters matches the eigenvalue oracle and bounds the estimator") {
    std::mt19937_64 rng(37);
    for (int k = 0; k < 2000; k++) {
        TwoQubitState s = random_state(rng, 1 + k % 4);
        double c = wootters_concurrence(s);
        CHECK(c == doctest::Approx(wootters_oracle(s.rho())).epsilon(1e-6));
        CHECK(concurrence_lower_bound(CorrelationData::exact(s)) <= c + 1e-12);
    }
}
