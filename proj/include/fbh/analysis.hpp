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
#include <string>
#include <vector>

#include "fbh/spin_register.hpp"

namespace fbh {

struct Estimate {
    double value = 0;
    double stderr_ = 0;
};

// Outcome probabilities (++, +-, -+, --) in one product basis, from `shots` trials (0 = exact).
struct BasisCorrelation {
    bool present = false;
    std::array<double, 4> p{};
    double shots = 0;

    double contrast() const { return p[0] + p[3] - p[1] - p[2]; }
    double binomial_error(int k) const;
};

struct CorrelationData {
    std::array<BasisCorrelation, 3> basis;

    BasisCorrelation &operator[](Basis b) { return basis[static_cast<int>(b)]; }
    const BasisCorrelation &operator[](Basis b) const { return basis[static_cast<int>(b)]; }

    void set(Basis b, const std::array<double, 4> &p, double shots = 0);
    void set_counts(Basis b, const std::array<long, 4> &counts);
    static CorrelationData exact(const TwoQubitState &state);
};

// F = (2 p_ud + 2 p_du + K_XX + K_YY) / 4 with binomial errors per basis added in quadrature.
Estimate bell_fidelity(const CorrelationData &data);

// C >= 2 max(0, (K_XX + K_YY)/4 - sqrt(p_uu p_dd)).
double concurrence_lower_bound(const CorrelationData &data);

double wootters_concurrence(const TwoQubitState &state);

}  // namespace fbh
