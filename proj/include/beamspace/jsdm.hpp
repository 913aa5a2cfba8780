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

#ifndef BEAMSPACE_JSDM_H
#define BEAMSPACE_JSDM_H

#include "beamspace/vcm.hpp"

#include <armadillo>
#include <vector>

namespace beamspace
{
    enum class OverlapPolicy
    {
        Release, // Leave shared beams unused
        Cfsdm    // Keep all beams, separate conflicting groups in frequency
    };

    struct SupportOverlap
    {
        int group_a = 0;
        int group_b = 0;
        std::vector<arma::uword> shared;
    };

    // Stacked pre-beamformer B = [F_{S_1} ... F_{S_G}]
    struct PreBeamformer
    {
        std::vector<SupportSet> supports;
        std::vector<arma::cx_mat> blocks; // N_u x |S_g| each
        std::vector<SupportOverlap> overlaps;

        bool disjoint() const { return overlaps.empty(); }
        arma::cx_mat stacked() const;
    };

    // Per-group reduced downlink y = H_dl P x + n with H_dl = H_{g,v}^h
    struct GroupDownlinkModel
    {
        int group = 0;
        SupportSet support;
        arma::cx_mat channel; // N_{d,g} x |S_g|
        double noise_variance = 1.0;

        arma::uword n_receive() const { return channel.n_rows; }
        arma::uword n_beams() const { return channel.n_cols; }
        arma::uword n_streams() const { return std::min(channel.n_rows, channel.n_cols); }
    };

    std::vector<SupportOverlap> find_overlaps(const std::vector<SupportSet> &supports);

    // Overlapping supports are reported in the result, not rejected
    PreBeamformer build_prebeamformers(const std::vector<SupportSet> &supports, const DftBasis &basis);

    // snr_s is linear; noise variance is 1 / snr_s for every group
    std::vector<GroupDownlinkModel> assemble_downlink(const std::vector<VirtualChannel> &groups, double snr_s);

    // Remove every bin claimed by two or more groups from all claimants. Groups may end empty.
    std::vector<SupportSet> resolve_overlap_release(const std::vector<SupportSet> &supports);

    // Full cascade blocks: entry [g][m] = H_g^h F_{S_m} P_m, the response of group g's
    // antennas to group m's precoded symbols.
    std::vector<std::vector<arma::cx_mat>> cascade_blocks(const std::vector<arma::cx_mat> &uplinks,
                                                          const PreBeamformer &prebeamformer,
                                                          const std::vector<arma::cx_mat> &precoders);

    // Inter-group received power over own-signal power for receiver group g
    double interference_ratio(const std::vector<std::vector<arma::cx_mat>> &blocks, std::size_t g);

    double db_to_linear(double db);
}

#endif
