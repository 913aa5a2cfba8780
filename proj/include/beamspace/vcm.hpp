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

#ifndef BEAMSPACE_VCM_H
#define BEAMSPACE_VCM_H

#include "beamspace/channel_synth.hpp"

#include <armadillo>
#include <string>
#include <vector>

namespace beamspace
{
    // Unitary DFT basis, entry (k, l) = exp(-j 2 pi k l / N) / sqrt(N).
    // Planar arrays use F_outer (x) F_inner, matching the steering vector ordering.
    class DftBasis
    {
    public:
        explicit DftBasis(arma::uword order);
        DftBasis(arma::uword n_outer, arma::uword n_inner);

        static DftBasis for_geometry(const ArrayGeometry &geometry);

        arma::uword order() const { return matrix_.n_cols; }
        arma::uword n_outer() const { return n_outer_; }
        arma::uword n_inner() const { return n_inner_; }
        const arma::cx_mat &matrix() const { return matrix_; }

        // Columns of the basis selected by a sorted index list
        arma::cx_mat columns(const std::vector<arma::uword> &indices) const;

    private:
        arma::uword n_outer_;
        arma::uword n_inner_;
        arma::cx_mat matrix_;
    };

    // Significant angular bins of one group, 0-based, sorted and unique
    struct SupportSet
    {
        int group = 0;
        std::vector<arma::uword> indices;
        double captured = 0.0; // Fraction of the channel power on the support

        bool empty() const { return indices.empty(); }
        std::size_t size() const { return indices.size(); }
        std::vector<arma::uword> one_based() const;
    };

    struct VirtualChannel
    {
        SupportSet support;
        arma::cx_mat matrix; // |S_g| x N_{d,g}, rows of F^h H on the support
    };

    // F^h H; throws on dimension mismatch
    arma::cx_mat project_vcm(const arma::cx_mat &H, const DftBasis &basis);

    // Bins whose power, averaged over all columns, exceeds the threshold
    SupportSet detect_support(const arma::cx_mat &H_tilde, double threshold = 1.0, int group = 0);

    // Range [lo, hi] of cos(theta) over an elevation cluster clipped to [0, pi]
    std::pair<double, double> cos_range(double theta, double spread);

    // Range of sin(theta) cos(phi) or sin(theta) sin(phi) over a (theta, phi) box
    std::pair<double, double> planar_axis_range(double theta, double theta_spread, double phi, double phi_spread,
                                                bool use_sin_phi);

    // Bins in the main lobe of some direction in the cluster: p with
    // |cos(theta) - p / (D N)| <= 1 / (D N). Negative bins wrap to N + p.
    std::vector<arma::uword> predicted_support_ula(double theta, double spread, double spacing, arma::uword n);

    // 3 + 2 D N |sin(theta)| spread, spread in radians
    double support_bound(double theta, double spread, double spacing, arma::uword n);

    // Sufficient condition for two elevation clusters to have disjoint predicted supports:
    // the main-lobe-widened cosine intervals are separated (first-quadrant form
    // cos(theta_a - spread) < cos(theta_b + spread) - 2 / (D N) for theta_a > theta_b,
    // reflected for the other quadrants), also across the 1/D aliasing period.
    bool clusters_separable(double theta_a, double theta_b, double spread, double spacing, arma::uword n);

    // Per-axis strict main-lobe intervals combined through the Kronecker index
    // outer_bin * n_inner + inner_bin
    std::vector<arma::uword> predicted_support_upa(double theta, double theta_spread, double phi, double phi_spread,
                                                   const ArrayGeometry &geometry);

    // Predicted support for any geometry
    std::vector<arma::uword> predicted_support(const GroupScenario &scenario, const ArrayGeometry &geometry);

    VirtualChannel effective_virtual_channel(const arma::cx_mat &H, const DftBasis &basis, const SupportSet &support);

    // ||H^h F_S||_F^2 / ||H||_F^2: power of H on a set of bins
    double power_fraction_on(const arma::cx_mat &H, const DftBasis &basis, const std::vector<arma::uword> &indices);

    std::vector<arma::uword> set_intersection(const std::vector<arma::uword> &a, const std::vector<arma::uword> &b);
    std::vector<arma::uword> set_union(const std::vector<arma::uword> &a, const std::vector<arma::uword> &b);

    // Jaccard similarity |a n b| / |a u b|, 1 for two empty sets
    double jaccard(const std::vector<arma::uword> &a, const std::vector<arma::uword> &b);
}

#endif
