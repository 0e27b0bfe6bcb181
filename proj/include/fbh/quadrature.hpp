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

#include <vector>

#include "fbh/errors.hpp"

namespace fbh {

inline constexpr int kDefaultDiffusionOrder = 21;

// Probabilists' Gauss-Hermite rule: sum_i w_i f(x_i) ~ E[f(X)] for X ~ N(0, 1); weights sum to 1.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussHermite gauss_hermite(int order);

// E[f(center + sigma X)], X ~ N(0, 1). sigma == 0 evaluates f(center) once.
template <class F>
auto diffusion_average(F &&f, double center, double sigma, int order = kDefaultDiffusionOrder) {
    if (!(sigma >= 0) || order < 1) {
        domain_error("diffusion_average: need sigma >= 0 and order >= 1");
    }
    if (sigma == 0) {
        return f(center);
    }
    GaussHermite gh = gauss_hermite(order);
    auto acc = f(center + sigma * gh.nodes[0]) * gh.weights[0];
    for (size_t i = 1; i < gh.nodes.size(); i++) {
        acc += f(center + sigma * gh.nodes[i]) * gh.weights[i];
    }
    return acc;
}

// Tensor-product rule over two independent Gaussian offsets. A zero width collapses that axis to one node.
struct DiffusionGrid {
    std::vector<double> offset_a;
    std::vector<double> offset_b;
    std::vector<double> weight;

    size_t size() const { return weight.size(); }
};

DiffusionGrid diffusion_grid(double sigma_a, double sigma_b, int order);

}  // namespace fbh
