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

#ifndef BEAMSPACE_CHANNEL_SYNTH_H
#define BEAMSPACE_CHANNEL_SYNTH_H

#include <armadillo>
#include <cstdint>
#include <vector>

namespace beamspace
{
    // Antenna layout at the base station.
    // ULA_Z:  counts = {N_z}
    // UPA_ZX: counts = {N_z, N_x}, vectorized as a_z (x) a_x, x index fastest
    // UPA_XY: counts = {N_y, N_x}, vectorized as a_y (x) a_x, x index fastest
    enum class ArrayKind
    {
        ULA_Z,
        UPA_ZX,
        UPA_XY
    };

    struct ArrayGeometry
    {
        ArrayKind kind = ArrayKind::ULA_Z;
        std::vector<arma::uword> counts = {100}; // ULA: 1 entry, UPA: {outer, inner}
        double spacing = 0.5;                    // Element distance in wavelengths (d / lambda)

        static ArrayGeometry ula(arma::uword n, double spacing);
        static ArrayGeometry upa(ArrayKind kind, arma::uword n_outer, arma::uword n_inner, double spacing);

        arma::uword n_elements() const;
        arma::uword n_outer() const; // z (ULA_Z, UPA_ZX) or y (UPA_XY)
        arma::uword n_inner() const; // x for UPA, 1 for ULA
        bool is_planar() const { return kind != ArrayKind::ULA_Z; }

        // Throws std::invalid_argument when counts or spacing are inconsistent
        void validate() const;
    };

    // One user group: an angular cluster plus its users' antenna counts. Angles in radians.
    struct GroupScenario
    {
        int id = 1;
        double theta = 0.0;        // Elevation center
        double theta_spread = 0.0; // Half-width of the elevation cluster
        double phi = 0.0;          // Azimuth center (UPA only)
        double phi_spread = 0.0;   // Half-width of the azimuth cluster (UPA only)
        arma::uword n_paths = 1;
        std::vector<arma::uword> user_antennas = {1};

        arma::uword n_antennas() const; // N_{d,g}, sum over users
        void validate() const;
    };

    // Test hooks for the generator
    struct SynthOptions
    {
        bool unit_gains = false;    // Force every path gain to 1
        bool shared_angles = false; // All antennas of one user see the same path angles
    };

    // Uplink channel of one group: n_elements x N_{d,g}
    using UplinkChannel = arma::cx_mat;

    // Tap matrices of a frequency-selective channel, tap l at delay l / B
    using TapChannel = std::vector<arma::cx_mat>;

    // a(theta): entry m = exp(-j 2 pi D m cos(theta))
    arma::cx_vec steering_ula(double theta, arma::uword n, double spacing);

    // Per-axis phase progression u: entry m = exp(-j 2 pi D m u)
    arma::cx_vec steering_axis(double direction_cosine, arma::uword n, double spacing);

    // Kronecker steering vector of a planar array (outer axis (x) x axis)
    arma::cx_vec steering_upa(double theta, double phi, const ArrayGeometry &geometry);

    // Dispatches to steering_ula or steering_upa
    arma::cx_vec steering(double theta, double phi, const ArrayGeometry &geometry);

    // Column for antenna n of user k: (1/sqrt(L)) sum_l beta_l a(theta_l, phi_l).
    // Deterministic in (seed, group id, user, antenna); groups do not depend on enumeration order.
    UplinkChannel synth_group_channel(const GroupScenario &scenario, const ArrayGeometry &geometry,
                                      std::uint64_t seed, const SynthOptions &options = {});

    // Tap-delay-line channel with n_taps taps. Tap l holds its own paths (angles and gains),
    // scaled by 1/sqrt(n_taps) so that the expected column energy over all taps is N_u.
    // With n_taps = 1 the single tap equals synth_group_channel for the same seed.
    TapChannel synth_fs_channel(const GroupScenario &scenario, const ArrayGeometry &geometry,
                                std::uint64_t seed, arma::uword n_taps, const SynthOptions &options = {});

    // Frequency response at subcarrier q: sum_l tap_l exp(-j 2 pi q l / Q)
    arma::cx_mat frequency_response(const TapChannel &taps, arma::uword q, arma::uword n_subcarriers);

    double deg_to_rad(double deg);
}

#endif
