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

#include "beamspace/channel_synth.hpp"
#include "rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace beamspace
{
    double deg_to_rad(double deg)
    {
        return deg * std::numbers::pi / 180.0;
    }

    ArrayGeometry ArrayGeometry::ula(arma::uword n, double spacing)
    {
        ArrayGeometry g;
        g.kind = ArrayKind::ULA_Z;
        g.counts = {n};
        g.spacing = spacing;
        g.validate();
        return g;
    }

    ArrayGeometry ArrayGeometry::upa(ArrayKind kind, arma::uword n_outer, arma::uword n_inner, double spacing)
    {
        ArrayGeometry g;
        g.kind = kind;
        g.counts = {n_outer, n_inner};
        g.spacing = spacing;
        g.validate();
        return g;
    }

    arma::uword ArrayGeometry::n_elements() const
    {
        arma::uword n = 1;
        for (auto c : counts)
            n *= c;
        return n;
    }

    arma::uword ArrayGeometry::n_outer() const
    {
        return counts.empty() ? 0 : counts[0];
    }

    arma::uword ArrayGeometry::n_inner() const
    {
        return counts.size() > 1 ? counts[1] : 1;
    }

    void ArrayGeometry::validate() const
    {
        const std::size_t expected = is_planar() ? 2 : 1;
        if (counts.size() != expected)
            throw std::invalid_argument("Array geometry needs " + std::to_string(expected) + " element count(s), got " +
                                        std::to_string(counts.size()) + ".");
        for (auto c : counts)
            if (c == 0)
                throw std::invalid_argument("Array element counts must be positive.");
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw std::invalid_argument("Normalized element spacing must be positive.");
    }

    arma::uword GroupScenario::n_antennas() const
    {
        arma::uword n = 0;
        for (auto a : user_antennas)
            n += a;
        return n;
    }

    void GroupScenario::validate() const
    {
        const double pi = std::numbers::pi;
        const double eps = 1e-12;
        if (theta_spread < 0.0 || phi_spread < 0.0)
            throw std::invalid_argument("Group " + std::to_string(id) + ": angular spreads cannot be negative.");
        if (theta - theta_spread < -eps || theta + theta_spread > pi + eps)
            throw std::invalid_argument("Group " + std::to_string(id) + ": elevation cluster must lie within [0, 180] degrees.");
        if (n_paths == 0)
            throw std::invalid_argument("Group " + std::to_string(id) + ": path count must be at least 1.");
        if (user_antennas.empty() || n_antennas() == 0)
            throw std::invalid_argument("Group " + std::to_string(id) + ": needs at least one user antenna.");
        for (auto a : user_antennas)
            if (a == 0)
                throw std::invalid_argument("Group " + std::to_string(id) + ": every user needs at least one antenna.");
    }

    arma::cx_vec steering_axis(double direction_cosine, arma::uword n, double spacing)
    {
        arma::cx_vec a(n);
        const double k = -2.0 * std::numbers::pi * spacing * direction_cosine;
        for (arma::uword m = 0; m < n; ++m)
            a[m] = std::polar(1.0, k * double(m));
        return a;
    }

    arma::cx_vec steering_ula(double theta, arma::uword n, double spacing)
    {
        return steering_axis(std::cos(theta), n, spacing);
    }

    arma::cx_vec steering_upa(double theta, double phi, const ArrayGeometry &geometry)
    {
        if (!geometry.is_planar())
            throw std::invalid_argument("steering_upa requires a UPA_ZX or UPA_XY geometry.");
        geometry.validate();

        const double st = std::sin(theta);
        const double u_inner = st * std::cos(phi); // x axis
        const double u_outer = geometry.kind == ArrayKind::UPA_ZX ? std::cos(theta) : st * std::sin(phi);

        arma::cx_vec a_outer = steering_axis(u_outer, geometry.n_outer(), geometry.spacing);
        arma::cx_vec a_inner = steering_axis(u_inner, geometry.n_inner(), geometry.spacing);
        return arma::kron(a_outer, a_inner);
    }

    arma::cx_vec steering(double theta, double phi, const ArrayGeometry &geometry)
    {
        if (geometry.is_planar())
            return steering_upa(theta, phi, geometry);
        return steering_ula(theta, geometry.n_outer(), geometry.spacing);
    }

    namespace
    {
        // One tap worth of columns. Substream keys: (group id, user, antenna, tap); with
        // shared angles the angle stream drops the antenna coordinate.
        arma::cx_mat synth_tap(const GroupScenario &sc, const ArrayGeometry &geo, std::uint64_t seed,
                               arma::uword tap, double scale, const SynthOptions &opt)
        {
            const arma::uword n_ant = sc.n_antennas();
            const double norm = scale / std::sqrt(double(sc.n_paths));
            arma::cx_mat H(geo.n_elements(), n_ant, arma::fill::zeros);

            arma::uword col = 0;
            for (std::size_t user = 0; user < sc.user_antennas.size(); ++user)
            {
                for (arma::uword ant = 0; ant < sc.user_antennas[user]; ++ant, ++col)
                {
                    const std::int64_t angle_ant = opt.shared_angles ? -1 : std::int64_t(ant);
                    detail::Stream angles(detail::derive_seed(seed, {sc.id, std::int64_t(user), angle_ant, std::int64_t(tap), 0}));
                    detail::Stream gains(detail::derive_seed(seed, {sc.id, std::int64_t(user), std::int64_t(ant), std::int64_t(tap), 1}));

                    for (arma::uword l = 0; l < sc.n_paths; ++l)
                    {
                        double theta = angles.uniform(sc.theta - sc.theta_spread, sc.theta + sc.theta_spread);
                        double phi = angles.uniform(sc.phi - sc.phi_spread, sc.phi + sc.phi_spread);
                        std::complex<double> beta = gains.complex_normal();
                        if (opt.unit_gains)
                            beta = 1.0;
                        H.col(col) += (norm * beta) * steering(theta, phi, geo);
                    }
                }
            }
            return H;
        }
    }

    UplinkChannel synth_group_channel(const GroupScenario &scenario, const ArrayGeometry &geometry,
                                      std::uint64_t seed, const SynthOptions &options)
    {
        geometry.validate();
        scenario.validate();
        return synth_tap(scenario, geometry, seed, 0, 1.0, options);
    }

    TapChannel synth_fs_channel(const GroupScenario &scenario, const ArrayGeometry &geometry,
                                std::uint64_t seed, arma::uword n_taps, const SynthOptions &options)
    {
        if (n_taps == 0)
            throw std::invalid_argument("Tap count must be at least 1.");
        geometry.validate();
        scenario.validate();

        TapChannel taps;
        taps.reserve(n_taps);
        const double scale = 1.0 / std::sqrt(double(n_taps));
        for (arma::uword l = 0; l < n_taps; ++l)
            taps.push_back(synth_tap(scenario, geometry, seed, l, scale, options));
        return taps;
    }

    arma::cx_mat frequency_response(const TapChannel &taps, arma::uword q, arma::uword n_subcarriers)
    {
        if (taps.empty())
            throw std::invalid_argument("Tap list is empty.");
        if (n_subcarriers < taps.size())
            throw std::invalid_argument("Subcarrier count must be at least the tap count.");
        arma::cx_mat H(arma::size(taps[0]), arma::fill::zeros);
        for (std::size_t l = 0; l < taps.size(); ++l)
        {
            const double ph = -2.0 * std::numbers::pi * double(q) * double(l) / double(n_subcarriers);
            H += std::polar(1.0, ph) * taps[l];
        }
        return H;
    }
}
