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

#include <cmath>
#include <random>

#include "fbh/spin_register.hpp"

namespace fbh::testing {

// Ginibre-distributed density matrix of the given rank.
inline TwoQubitState random_state(std::mt19937_64 &rng, int rank = 4) {
    std::normal_distribution<double> n(0, 1);
    Eigen::Matrix<std::complex<double>, 4, Eigen::Dynamic> g(4, rank);
    for (int i = 0; i < 4; i++) {
        for (int j = 0; j < rank; j++) {
            g(i, j) = {n(rng), n(rng)};
        }
    }
    Matrix4c rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return TwoQubitState(rho);
}

inline Vector4c random_vector(std::mt19937_64 &rng) {
    std::normal_distribution<double> n(0, 1);
    Vector4c v;
    for (int i = 0; i < 4; i++) {
        v(i) = {n(rng), n(rng)};
    }
    return v;
}

inline double max_abs(const Matrix4c &m) { return m.cwiseAbs().maxCoeff(); }

inline PulseSpec pulse(Qubit q, Axis axis, double angle) {
    PulseSpec p;
    p.target = q;
    p.axis = axis;
    p.angle = angle;
    return p;
}

// |+>|+> in the computational basis.
inline Vector4c equator_product() {
    Eigen::Vector2cd plus(1 / std::sqrt(2.0), 1 / std::sqrt(2.0));
    Vector4c v;
    v << plus(0) * plus(0), plus(0) * plus(1), plus(1) * plus(0), plus(1) * plus(1);
    return v;
}

}  // namespace fbh::testing
