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

#ifndef BEAMSPACE_OFDM_CFSDM_H
#define BEAMSPACE_OFDM_CFSDM_H

#include "beamspace/channel_synth.hpp"
#include "beamspace/mutual_information.hpp"
#include "beamspace/vcm.hpp"

#include <armadillo>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace beamspace
{
    // Downlink of one group on subcarrier q, restricted to the support:
    // (sum_l F_S^h tap_l exp(-j 2 pi q l / Q))^h, size N_{d,g} x |S_g|.
    // Taps sit at delays 0..L-1, i.e. the first L rows of the order-Q DFT.
    // Energy: sum_q ||H^(q)||_F^2 = Q sum_l ||F_S^h tap_l||_F^2 for Q >= L.
    struct SubcarrierChannel
    {
        arma::uword q = 0;
        arma::uword n_subcarriers = 0;
        arma::cx_mat downlink;
    };

    std::vector<SubcarrierChannel> per_subcarrier_channels(const TapChannel &taps, const DftBasis &basis,
                                                           const SupportSet &support, arma::uword n_subcarriers);

    // Single subcarrier, same convention
    SubcarrierChannel subcarrier_channel(const TapChannel &taps, const DftBasis &basis, const SupportSet &support,
                                         arma::uword q, arma::uword n_subcarriers);

    // Support from the subcarrier-averaged bin power sum_l mean_n |F^h tap_l|^2
    SupportSet detect_support_fs(const TapChannel &taps, const DftBasis &basis, double threshold = 1.0, int group = 0);

    // max_i |s_i(a) - s_i(b)| / s_max(a)
    double singular_value_deviation(const SubcarrierChannel &a, const SubcarrierChannel &b);

    // Rows of the group downlink that belong to user k
    arma::cx_mat user_downlink(const arma::cx_mat &group_downlink, const GroupScenario &scenario, arma::uword user);

    // y = H_user P c + n, decoded by the user alone
    EffectiveChannel per_user_receiver_model(const arma::cx_mat &user_downlink, const arma::cx_mat &precoder,
                                             double noise_variance);

    class CapacityError : public std::runtime_error
    {
    public:
        CapacityError(arma::uword required, arma::uword available);
        arma::uword required() const { return required_; }
        arma::uword available() const { return available_; }
        arma::uword deficit() const { return required_ - available_; }

    private:
        arma::uword required_;
        arma::uword available_;
    };

    struct CfsdmGroup
    {
        int group = 0;
        std::vector<arma::uword> support;
        arma::uword n_users = 1;
    };

    struct UserSubcarrier
    {
        int group = 0;
        arma::uword user = 0;
        arma::uword subcarrier = 0;
    };

    struct CfsdmAssignment
    {
        std::map<int, std::vector<arma::uword>> group_subcarriers;
        std::vector<UserSubcarrier> users;        // Ordered by (group, user)
        std::vector<std::pair<int, int>> conflicts; // Pairs of groups with intersecting supports
        arma::uword n_subcarriers = 0;            // Q

        arma::uword subcarrier(int group, arma::uword user) const;
        arma::uword n_used() const;               // Distinct subcarriers in use
        bool valid() const;                       // No conflicting pair shares a subcarrier; contiguous per group
        std::string to_json() const;              // [{group, user, subcarrier}, ...]
    };

    // Greedy coloring in descending conflict degree (ties by input order). Each group takes
    // the lowest block of n_users contiguous subcarriers not used by a conflicting group.
    CfsdmAssignment cfsdm_assign(const std::vector<CfsdmGroup> &groups, arma::uword n_subcarriers);
}

#endif
