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

#include "beamspace/ofdm_cfsdm.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <numeric>
#include <set>

namespace beamspace
{
    namespace
    {
        std::vector<arma::cx_mat> virtual_taps(const TapChannel &taps, const DftBasis &basis, const SupportSet &support)
        {
            if (taps.empty())
                throw std::invalid_argument("Tap list is empty.");
            if (support.empty())
                throw std::invalid_argument("Support set is empty.");
            const arma::cx_mat FS = basis.columns(support.indices);
            std::vector<arma::cx_mat> out;
            out.reserve(taps.size());
            for (const auto &t : taps)
            {
                if (t.n_rows != basis.order())
                    throw std::invalid_argument("Tap row count does not match the DFT basis.");
                out.push_back(FS.t() * t);
            }
            return out;
        }

        SubcarrierChannel combine(const std::vector<arma::cx_mat> &vtaps, arma::uword q, arma::uword Q)
        {
            arma::cx_mat Hq(arma::size(vtaps[0]), arma::fill::zeros);
            for (std::size_t l = 0; l < vtaps.size(); ++l)
            {
                const double ph = -2.0 * std::numbers::pi * double((q * l) % Q) / double(Q);
                Hq += std::polar(1.0, ph) * vtaps[l];
            }
            return {q, Q, Hq.t()};
        }

        void check_q(arma::uword n_taps, arma::uword Q)
        {
            if (Q < n_taps)
                throw std::invalid_argument("Subcarrier count Q = " + std::to_string(Q) +
                                            " is smaller than the tap count L = " + std::to_string(n_taps) + ".");
        }
    }

    std::vector<SubcarrierChannel> per_subcarrier_channels(const TapChannel &taps, const DftBasis &basis,
                                                           const SupportSet &support, arma::uword n_subcarriers)
    {
        check_q(taps.size(), n_subcarriers);
        const auto vt = virtual_taps(taps, basis, support);
        std::vector<SubcarrierChannel> out;
        out.reserve(n_subcarriers);
        for (arma::uword q = 0; q < n_subcarriers; ++q)
            out.push_back(combine(vt, q, n_subcarriers));
        return out;
    }

    SubcarrierChannel subcarrier_channel(const TapChannel &taps, const DftBasis &basis, const SupportSet &support,
                                         arma::uword q, arma::uword n_subcarriers)
    {
        check_q(taps.size(), n_subcarriers);
        if (q >= n_subcarriers)
            throw std::invalid_argument("Subcarrier index out of range.");
        return combine(virtual_taps(taps, basis, support), q, n_subcarriers);
    }

    SupportSet detect_support_fs(const TapChannel &taps, const DftBasis &basis, double threshold, int group)
    {
        if (taps.empty())
            throw std::invalid_argument("Tap list is empty.");
        arma::mat power(basis.order(), taps[0].n_cols, arma::fill::zeros);
        for (const auto &t : taps)
            power += arma::square(arma::abs(project_vcm(t, basis)));
        // sqrt of the summed power has the same row means as the averaged frequency response
        return detect_support(arma::conv_to<arma::cx_mat>::from(arma::sqrt(power)), threshold, group);
    }

    double singular_value_deviation(const SubcarrierChannel &a, const SubcarrierChannel &b)
    {
        if (arma::size(a.downlink) != arma::size(b.downlink))
            throw std::invalid_argument("Subcarrier channels differ in shape.");
        const arma::vec sa = arma::svd(a.downlink);
        const arma::vec sb = arma::svd(b.downlink);
        if (sa.n_elem == 0 || sa[0] <= 0.0)
            throw std::invalid_argument("Reference subcarrier channel is zero.");
        return arma::max(arma::abs(sa - sb)) / sa[0];
    }

    arma::cx_mat user_downlink(const arma::cx_mat &group_downlink, const GroupScenario &scenario, arma::uword user)
    {
        if (user >= scenario.user_antennas.size())
            throw std::invalid_argument("User index out of range.");
        if (group_downlink.n_rows != scenario.n_antennas())
            throw std::invalid_argument("Group downlink rows do not match the group's antenna count.");
        arma::uword first = 0;
        for (arma::uword k = 0; k < user; ++k)
            first += scenario.user_antennas[k];
        return group_downlink.rows(first, first + scenario.user_antennas[user] - 1);
    }

    EffectiveChannel per_user_receiver_model(const arma::cx_mat &user_downlink, const arma::cx_mat &precoder,
                                             double noise_variance)
    {
        if (user_downlink.n_cols != precoder.n_rows)
            throw std::invalid_argument("Precoder rows do not match the number of beams.");
        if (!(noise_variance > 0.0))
            throw std::invalid_argument("Noise variance must be positive.");
        return {user_downlink * precoder, noise_variance};
    }

    CapacityError::CapacityError(arma::uword required, arma::uword available)
        : std::runtime_error("CFSDM needs " + std::to_string(required) + " subcarriers but Q = " +
                             std::to_string(available) + " (deficit " + std::to_string(required - available) + ")."),
          required_(required), available_(available)
    {
    }

    arma::uword CfsdmAssignment::subcarrier(int group, arma::uword user) const
    {
        for (const auto &u : users)
            if (u.group == group && u.user == user)
                return u.subcarrier;
        throw std::out_of_range("No subcarrier for this group/user.");
    }

    arma::uword CfsdmAssignment::n_used() const
    {
        std::set<arma::uword> used;
        for (const auto &u : users)
            used.insert(u.subcarrier);
        return used.size();
    }

    bool CfsdmAssignment::valid() const
    {
        for (const auto &[g, subs] : group_subcarriers)
        {
            for (std::size_t i = 1; i < subs.size(); ++i)
                if (subs[i] != subs[i - 1] + 1)
                    return false;
            for (auto q : subs)
                if (q >= n_subcarriers)
                    return false;
        }
        for (const auto &[a, b] : conflicts)
        {
            const auto &sa = group_subcarriers.at(a), &sb = group_subcarriers.at(b);
            for (auto q : sa)
                if (std::find(sb.begin(), sb.end(), q) != sb.end())
                    return false;
        }
        return true;
    }

    std::string CfsdmAssignment::to_json() const
    {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto &u : users)
            arr.push_back({{"group", u.group}, {"user", u.user + 1}, {"subcarrier", u.subcarrier}});
        return arr.dump(2);
    }

    CfsdmAssignment cfsdm_assign(const std::vector<CfsdmGroup> &groups, arma::uword n_subcarriers)
    {
        const std::size_t G = groups.size();
        std::set<int> ids;
        for (const auto &g : groups)
        {
            if (g.n_users == 0)
                throw std::invalid_argument("Group " + std::to_string(g.group) + " has no users.");
            if (!ids.insert(g.group).second)
                throw std::invalid_argument("Duplicate group id " + std::to_string(g.group) + ".");
        }

        CfsdmAssignment out;
        out.n_subcarriers = n_subcarriers;

        std::vector<std::vector<std::size_t>> adj(G);
        for (std::size_t a = 0; a < G; ++a)
            for (std::size_t b = a + 1; b < G; ++b)
                if (!set_intersection(groups[a].support, groups[b].support).empty())
                {
                    adj[a].push_back(b);
                    adj[b].push_back(a);
                    out.conflicts.emplace_back(groups[a].group, groups[b].group);
                }

        std::vector<std::size_t> order(G);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b)
                         { return adj[a].size() > adj[b].size(); });

        std::vector<arma::uword> start(G, 0);
        std::vector<char> placed(G, 0);
        arma::uword required = 0;
        for (std::size_t g : order)
        {
            const arma::uword k = groups[g].n_users;
            arma::uword s = 0;
            bool moved = true;
            while (moved)
            {
                moved = false;
                for (std::size_t h : adj[g])
                {
                    if (!placed[h])
                        continue;
                    const arma::uword hs = start[h], he = hs + groups[h].n_users;
                    if (s < he && hs < s + k)
                    {
                        s = he;
                        moved = true;
                    }
                }
            }
            start[g] = s;
            placed[g] = 1;
            required = std::max(required, s + k);
        }
        if (required > n_subcarriers)
            throw CapacityError(required, n_subcarriers);

        std::vector<std::size_t> by_id(G);
        std::iota(by_id.begin(), by_id.end(), 0);
        std::stable_sort(by_id.begin(), by_id.end(),
                         [&](std::size_t a, std::size_t b)
                         { return groups[a].group < groups[b].group; });
        for (std::size_t g : by_id)
        {
            auto &subs = out.group_subcarriers[groups[g].group];
            for (arma::uword k = 0; k < groups[g].n_users; ++k)
            {
                subs.push_back(start[g] + k);
                out.users.push_back({groups[g].group, k, start[g] + k});
            }
        }
        return out;
    }
}
