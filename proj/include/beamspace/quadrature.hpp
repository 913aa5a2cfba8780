// SPDX-License-Identifier: Apache-2.0
//
// beamspace: virtual channel model precoding for massive MIMO downlinks
// Copyright (C) 2026 The beamspace authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef BEAMSPACE_QUADRATURE_H
#define BEAMSPACE_QUADRATURE_H

#include <armadillo>
#include <complex>
#include <vector>

namespace beamspace
{
    // Gauss-Hermite rule for the weight exp(-x^2) on the real line
    struct GaussHermiteRule
    {
        arma::vec nodes;
        arma::vec weights; // Sum to sqrt(pi)

        static GaussHermiteRule make(arma::uword n_points);
    };

    // Tensor product nodes for the circular complex Gaussian noise of r receive dimensions.
    // Each complex dimension takes two real axes (real and imaginary part), so the grid has
    // n_points^(2 r) nodes. Node values are for unit noise variance: n = sigma * node.
    struct TensorNodes
    {
        arma::uword n_dims = 0;
        std::vector<std::complex<double>> values; // n_nodes * n_dims, node-major
        std::vector<double> weights;              // Normalized to sum 1

        arma::uword size() const { return weights.size(); }
    };

    class QuadratureGrid
    {
    public:
        explicit QuadratureGrid(arma::uword n_receive, arma::uword points_per_axis = 3);

        arma::uword n_receive() const { return n_receive_; }
        arma::uword points_per_axis() const { return rule_.nodes.n_elem; }
        arma::uword size() const; // points_per_axis^(2 n_receive)
        const GaussHermiteRule &rule() const { return rule_; }

        // Sum of the unnormalized tensor weights, pi^n_receive
        double raw_weight_sum() const;

        // Grid for an arbitrary number of complex dimensions using the same rule
        TensorNodes tensor(arma::uword n_dims) const;

    private:
        arma::uword n_receive_;
        GaussHermiteRule rule_;
    };
}

#endif
