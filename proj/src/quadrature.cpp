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

#include "fbh/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace fbh {

GaussHermite gauss_hermite(int order) {
    if (order < 1) {
        domain_error("gauss_hermite: order must be >= 1");
    }
    // Golub-Welsch on the Jacobi matrix of the monic probabilists' Hermite recurrence.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; k++) {
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(double(k));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    GaussHermite gh;
    gh.nodes.resize(order);
    gh.weights.resize(order);
    double total = 0;
    for (int i = 0; i < order; i++) {
        gh.nodes[i] = eig.eigenvalues()(i);
        double v = eig.eigenvectors()(0, i);
        gh.weights[i] = v * v;
        total += gh.weights[i];
    }
    // Symmetrize; the rule is exactly symmetric about zero.
    for (int i = 0; i < order / 2; i++) {
        int j = order - 1 - i;
        double x = 0.5 * (gh.nodes[j] - gh.nodes[i]);
        double w = 0.5 * (gh.weights[i] + gh.weights[j]);
        gh.nodes[i] = -x;
        gh.nodes[j] = x;
        gh.weights[i] = gh.weights[j] = w;
    }
    if (order % 2 == 1) {
        gh.nodes[order / 2] = 0;
    }
    for (double &w : gh.weights) {
        w /= total;
    }
    return gh;
}

DiffusionGrid diffusion_grid(double sigma_a, double sigma_b, int order) {
    if (!(sigma_a >= 0) || !(sigma_b >= 0)) {
        domain_error("diffusion_grid: widths must be >= 0");
    }
    GaussHermite gh = gauss_hermite(order);
    auto axis = [&](double sigma, std::vector<double> &x, std::vector<double> &w) {
        if (sigma == 0) {
            x = {0.0};
            w = {1.0};
            return;
        }
        for (size_t i = 0; i < gh.nodes.size(); i++) {
            x.push_back(sigma * gh.nodes[i]);
            w.push_back(gh.weights[i]);
        }
    };
    std::vector<double> xa, wa, xb, wb;
    axis(sigma_a, xa, wa);
    axis(sigma_b, xb, wb);
    DiffusionGrid grid;
    for (size_t i = 0; i < xa.size(); i++) {
        for (size_t j = 0; j < xb.size(); j++) {
            grid.offset_a.push_back(xa[i]);
            grid.offset_b.push_back(xb[j]);
            grid.weight.push_back(wa[i] * wb[j]);
        }
    }
    return grid;
}

}  // namespace fbh
