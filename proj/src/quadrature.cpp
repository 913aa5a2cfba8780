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

#include "beamspace/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamspace
{
    // Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the Hermite recurrence
    GaussHermiteRule GaussHermiteRule::make(arma::uword n_points)
    {
        if (n_points == 0)
            throw std::invalid_argument("Gauss-Hermite rule needs at least one point.");

        arma::mat J(n_points, n_points, arma::fill::zeros);
        for (arma::uword i = 1; i < n_points; ++i)
        {
            J(i, i - 1) = std::sqrt(double(i) / 2.0);
            J(i - 1, i) = J(i, i - 1);
        }
        arma::vec eigval;
        arma::mat eigvec;
        arma::eig_sym(eigval, eigvec, J);

        GaussHermiteRule r;
        r.nodes = eigval;
        r.weights = std::sqrt(std::numbers::pi) * arma::square(eigvec.row(0).t());

        // Exact symmetry of the rule
        for (arma::uword i = 0; i < n_points / 2; ++i)
        {
            const arma::uword j = n_points - 1 - i;
            const double x = 0.5 * (r.nodes[j] - r.nodes[i]);
            const double w = 0.5 * (r.weights[i] + r.weights[j]);
            r.nodes[i] = -x, r.nodes[j] = x;
            r.weights[i] = w, r.weights[j] = w;
        }
        if (n_points % 2 == 1)
            r.nodes[n_points / 2] = 0.0;
        return r;
    }

    QuadratureGrid::QuadratureGrid(arma::uword n_receive, arma::uword points_per_axis)
        : n_receive_(n_receive), rule_(GaussHermiteRule::make(points_per_axis))
    {
        if (n_receive == 0)
            throw std::invalid_argument("Quadrature grid needs at least one receive dimension.");
    }

    arma::uword QuadratureGrid::size() const
    {
        arma::uword n = 1;
        for (arma::uword i = 0; i < 2 * n_receive_; ++i)
            n *= points_per_axis();
        return n;
    }

    double QuadratureGrid::raw_weight_sum() const
    {
        return std::pow(arma::accu(rule_.weights), 2.0 * double(n_receive_));
    }

    TensorNodes QuadratureGrid::tensor(arma::uword n_dims) const
    {
        const arma::uword L = points_per_axis();
        const arma::uword axes = 2 * n_dims;
        arma::uword n_nodes = 1;
        for (arma::uword i = 0; i < axes; ++i)
            n_nodes *= L;

        TensorNodes t;
        t.n_dims = n_dims;
        t.values.resize(n_nodes * n_dims);
        t.weights.resize(n_nodes);

        const double norm = std::pow(std::numbers::pi, -double(n_dims));
        std::vector<arma::uword> digit(axes, 0);
        for (arma::uword node = 0; node < n_nodes; ++node)
        {
            double w = norm;
            for (arma::uword d = 0; d < n_dims; ++d)
            {
                const arma::uword ire = digit[2 * d], iim = digit[2 * d + 1];
                t.values[node * n_dims + d] = {rule_.nodes[ire], rule_.nodes[iim]};
                w *= rule_.weights[ire] * rule_.weights[iim];
            }
            t.weights[node] = w;

            for (arma::uword a = 0; a < axes; ++a)
            {
                if (++digit[a] < L)
                    break;
                digit[a] = 0;
            }
        }
        return t;
    }
}
