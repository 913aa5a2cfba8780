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

#include "beamspace/vcm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

namespace beamspace
{
    namespace
    {
        constexpr double kBoundaryTol = 1e-9;

        arma::cx_mat dft_matrix(arma::uword n)
        {
            arma::cx_mat F(n, n);
            const double scale = 1.0 / std::sqrt(double(n));
            for (arma::uword l = 0; l < n; ++l)
                for (arma::uword k = 0; k < n; ++k)
                {
                    // Reduce k*l mod n first so the phase stays accurate for large orders
                    const double ph = -2.0 * std::numbers::pi * double((k * l) % n) / double(n);
                    F(k, l) = std::polar(scale, ph);
                }
            return F;
        }

        arma::uword wrap(long long p, arma::uword n)
        {
            long long m = p % (long long)n;
            if (m < 0)
                m += (long long)n;
            return arma::uword(m);
        }

        // Closed main-lobe interval of bins [ceil(D N lo - 1), floor(D N hi + 1)]
        std::pair<long long, long long> closed_bins(double lo, double hi, double dn)
        {
            return {(long long)std::ceil(dn * lo - 1.0 - kBoundaryTol), (long long)std::floor(dn * hi + 1.0 + kBoundaryTol)};
        }

        // Open main-lobe interval (D N lo - 1, D N hi + 1)
        std::pair<long long, long long> open_bins(double lo, double hi, double dn)
        {
            return {(long long)std::floor(dn * lo - 1.0 + kBoundaryTol) + 1, (long long)std::ceil(dn * hi + 1.0 - kBoundaryTol) - 1};
        }

        // Range of cos (or sin) over [a, b]
        std::pair<double, double> trig_range(double a, double b, bool use_sin)
        {
            auto f = [use_sin](double x)
            { return use_sin ? std::sin(x) : std::cos(x); };
            double lo = std::min(f(a), f(b));
            double hi = std::max(f(a), f(b));
            const double two_pi = 2.0 * std::numbers::pi;
            // Location of the maximum (phase 0 for cos, pi/2 for sin) and minimum
            const double max_at = use_sin ? 0.5 * std::numbers::pi : 0.0;
            const double min_at = max_at + std::numbers::pi;
            if (std::ceil((a - max_at) / two_pi) <= std::floor((b - max_at) / two_pi))
                hi = 1.0;
            if (std::ceil((a - min_at) / two_pi) <= std::floor((b - min_at) / two_pi))
                lo = -1.0;
            return {lo, hi};
        }
    }

    DftBasis::DftBasis(arma::uword order)
        : n_outer_(order), n_inner_(1), matrix_(dft_matrix(order))
    {
        if (order == 0)
            throw std::invalid_argument("DFT order must be positive.");
    }

    DftBasis::DftBasis(arma::uword n_outer, arma::uword n_inner)
        : n_outer_(n_outer), n_inner_(n_inner)
    {
        if (n_outer == 0 || n_inner == 0)
            throw std::invalid_argument("DFT order must be positive.");
        matrix_ = arma::kron(dft_matrix(n_outer), dft_matrix(n_inner));
    }

    DftBasis DftBasis::for_geometry(const ArrayGeometry &geometry)
    {
        geometry.validate();
        if (geometry.is_planar())
            return DftBasis(geometry.n_outer(), geometry.n_inner());
        return DftBasis(geometry.n_outer());
    }

    arma::cx_mat DftBasis::columns(const std::vector<arma::uword> &indices) const
    {
        arma::cx_mat out(order(), indices.size());
        for (std::size_t i = 0; i < indices.size(); ++i)
        {
            if (indices[i] >= order())
                throw std::out_of_range("Support index " + std::to_string(indices[i]) + " outside basis of order " +
                                        std::to_string(order()) + ".");
            out.col(i) = matrix_.col(indices[i]);
        }
        return out;
    }

    std::vector<arma::uword> SupportSet::one_based() const
    {
        std::vector<arma::uword> out(indices);
        for (auto &i : out)
            ++i;
        return out;
    }

    arma::cx_mat project_vcm(const arma::cx_mat &H, const DftBasis &basis)
    {
        if (H.n_rows != basis.order())
            throw std::invalid_argument("Channel has " + std::to_string(H.n_rows) + " rows but the basis order is " +
                                        std::to_string(basis.order()) + ".");
        return basis.matrix().t() * H;
    }

    SupportSet detect_support(const arma::cx_mat &H_tilde, double threshold, int group)
    {
        if (!(threshold > 0.0))
            throw std::invalid_argument("Support threshold must be positive.");

        SupportSet s;
        s.group = group;
        if (H_tilde.n_elem == 0)
            return s;

        arma::vec row_power = arma::mean(arma::square(arma::abs(H_tilde)), 1);
        const double total = arma::accu(row_power);
        double on_support = 0.0;
        for (arma::uword p = 0; p < row_power.n_elem; ++p)
            if (row_power[p] > threshold)
            {
                s.indices.push_back(p);
                on_support += row_power[p];
            }
        s.captured = total > 0.0 ? on_support / total : 0.0;
        return s;
    }

    std::pair<double, double> cos_range(double theta, double spread)
    {
        const double lo_angle = std::max(0.0, theta - spread);
        const double hi_angle = std::min(std::numbers::pi, theta + spread);
        return {std::cos(hi_angle), std::cos(lo_angle)};
    }

    std::pair<double, double> planar_axis_range(double theta, double theta_spread, double phi, double phi_spread,
                                                bool use_sin_phi)
    {
        const double t_lo = std::max(0.0, theta - theta_spread);
        const double t_hi = std::min(std::numbers::pi, theta + theta_spread);
        auto [s_lo, s_hi] = trig_range(t_lo, t_hi, true);
        s_lo = std::max(0.0, s_lo);
        auto [c_lo, c_hi] = trig_range(phi - phi_spread, phi + phi_spread, use_sin_phi);

        // sin(theta) >= 0, so the extremes of the product sit on the box corners
        const double corners[4] = {s_lo * c_lo, s_lo * c_hi, s_hi * c_lo, s_hi * c_hi};
        return {*std::min_element(corners, corners + 4), *std::max_element(corners, corners + 4)};
    }

    std::vector<arma::uword> predicted_support_ula(double theta, double spread, double spacing, arma::uword n)
    {
        if (n == 0 || !(spacing > 0.0))
            throw std::invalid_argument("predicted_support_ula needs n > 0 and spacing > 0.");
        auto [c_lo, c_hi] = cos_range(theta, spread);
        auto [p_lo, p_hi] = closed_bins(c_lo, c_hi, spacing * double(n));
        std::set<arma::uword> bins;
        for (long long p = p_lo; p <= p_hi; ++p)
            bins.insert(wrap(p, n));
        return {bins.begin(), bins.end()};
    }

    double support_bound(double theta, double spread, double spacing, arma::uword n)
    {
        return 3.0 + 2.0 * spacing * double(n) * std::abs(std::sin(theta)) * spread;
    }

    bool clusters_separable(double theta_a, double theta_b, double spread, double spacing, arma::uword n)
    {
        const double margin = 1.0 / (spacing * double(n));
        auto [a_lo, a_hi] = cos_range(theta_a, spread);
        auto [b_lo, b_hi] = cos_range(theta_b, spread);
        a_lo -= margin, a_hi += margin, b_lo -= margin, b_hi += margin;

        // Bin index p / (D N) is periodic in the cosine domain with period 1 / D
        const double period = 1.0 / spacing;
        const int reach = int(std::ceil(2.0 * (1.0 + margin) / period)) + 1;
        for (int k = -reach; k <= reach; ++k)
        {
            const double lo = b_lo + k * period, hi = b_hi + k * period;
            const bool apart = a_hi < lo || hi < a_lo;
            if (!apart)
                return false;
        }
        return true;
    }

    std::vector<arma::uword> predicted_support_upa(double theta, double theta_spread, double phi, double phi_spread,
                                                   const ArrayGeometry &geometry)
    {
        if (!geometry.is_planar())
            throw std::invalid_argument("predicted_support_upa requires a planar geometry.");
        geometry.validate();

        const arma::uword n_o = geometry.n_outer(), n_i = geometry.n_inner();
        const double D = geometry.spacing;

        std::pair<double, double> outer_range;
        if (geometry.kind == ArrayKind::UPA_ZX)
            outer_range = cos_range(theta, theta_spread);
        else
            outer_range = planar_axis_range(theta, theta_spread, phi, phi_spread, true);
        auto inner_range = planar_axis_range(theta, theta_spread, phi, phi_spread, false);

        auto [o_lo, o_hi] = open_bins(outer_range.first, outer_range.second, D * double(n_o));
        auto [i_lo, i_hi] = open_bins(inner_range.first, inner_range.second, D * double(n_i));

        std::set<arma::uword> outer_bins, inner_bins, bins;
        for (long long p = o_lo; p <= o_hi; ++p)
            outer_bins.insert(wrap(p, n_o));
        for (long long p = i_lo; p <= i_hi; ++p)
            inner_bins.insert(wrap(p, n_i));
        for (auto o : outer_bins)
            for (auto i : inner_bins)
                bins.insert(o * n_i + i);
        return {bins.begin(), bins.end()};
    }

    std::vector<arma::uword> predicted_support(const GroupScenario &scenario, const ArrayGeometry &geometry)
    {
        if (geometry.is_planar())
            return predicted_support_upa(scenario.theta, scenario.theta_spread, scenario.phi, scenario.phi_spread, geometry);
        return predicted_support_ula(scenario.theta, scenario.theta_spread, geometry.spacing, geometry.n_outer());
    }

    VirtualChannel effective_virtual_channel(const arma::cx_mat &H, const DftBasis &basis, const SupportSet &support)
    {
        arma::cx_mat Ht = project_vcm(H, basis);
        VirtualChannel v;
        v.support = support;
        v.matrix.zeros(support.size(), H.n_cols);
        for (std::size_t i = 0; i < support.size(); ++i)
        {
            if (support.indices[i] >= basis.order())
                throw std::invalid_argument("Support index outside the basis.");
            v.matrix.row(i) = Ht.row(support.indices[i]);
        }
        const double total = std::pow(arma::norm(H, "fro"), 2);
        v.support.captured = total > 0.0 ? std::pow(arma::norm(v.matrix, "fro"), 2) / total : 0.0;
        return v;
    }

    double power_fraction_on(const arma::cx_mat &H, const DftBasis &basis, const std::vector<arma::uword> &indices)
    {
        const double total = std::pow(arma::norm(H, "fro"), 2);
        if (total == 0.0 || indices.empty())
            return 0.0;
        arma::cx_mat cross = H.t() * basis.columns(indices);
        return std::pow(arma::norm(cross, "fro"), 2) / total;
    }

    std::vector<arma::uword> set_intersection(const std::vector<arma::uword> &a, const std::vector<arma::uword> &b)
    {
        std::vector<arma::uword> out;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        return out;
    }

    std::vector<arma::uword> set_union(const std::vector<arma::uword> &a, const std::vector<arma::uword> &b)
    {
        std::vector<arma::uword> out;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        return out;
    }

    double jaccard(const std::vector<arma::uword> &a, const std::vector<arma::uword> &b)
    {
        auto u = set_union(a, b);
        if (u.empty())
            return 1.0;
        return double(set_intersection(a, b).size()) / double(u.size());
    }
}
