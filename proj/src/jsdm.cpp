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

#include "beamspace/jsdm.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace beamspace
{
    double db_to_linear(double db)
    {
        return std::pow(10.0, db / 10.0);
    }

    arma::cx_mat PreBeamformer::stacked() const
    {
        if (blocks.empty())
            return {};
        arma::cx_mat B = blocks.front();
        for (std::size_t i = 1; i < blocks.size(); ++i)
            B = arma::join_rows(B, blocks[i]);
        return B;
    }

    std::vector<SupportOverlap> find_overlaps(const std::vector<SupportSet> &supports)
    {
        std::vector<SupportOverlap> out;
        for (std::size_t a = 0; a < supports.size(); ++a)
            for (std::size_t b = a + 1; b < supports.size(); ++b)
            {
                auto shared = set_intersection(supports[a].indices, supports[b].indices);
                if (!shared.empty())
                    out.push_back({supports[a].group, supports[b].group, std::move(shared)});
            }
        return out;
    }

    PreBeamformer build_prebeamformers(const std::vector<SupportSet> &supports, const DftBasis &basis)
    {
        PreBeamformer pb;
        pb.supports = supports;
        for (const auto &s : supports)
            pb.blocks.push_back(basis.columns(s.indices));
        pb.overlaps = find_overlaps(supports);
        return pb;
    }

    std::vector<GroupDownlinkModel> assemble_downlink(const std::vector<VirtualChannel> &groups, double snr_s)
    {
        if (!(snr_s > 0.0))
            throw std::invalid_argument("Symbol SNR must be positive.");
        std::vector<GroupDownlinkModel> out;
        out.reserve(groups.size());
        for (const auto &v : groups)
        {
            GroupDownlinkModel m;
            m.group = v.support.group;
            m.support = v.support;
            m.channel = v.matrix.t();
            m.noise_variance = 1.0 / snr_s;
            out.push_back(std::move(m));
        }
        return out;
    }

    std::vector<SupportSet> resolve_overlap_release(const std::vector<SupportSet> &supports)
    {
        if (supports.size() < 2)
            return supports;

        std::map<arma::uword, int> claims;
        for (const auto &s : supports)
            for (auto i : s.indices)
                ++claims[i];

        std::vector<SupportSet> out;
        out.reserve(supports.size());
        for (const auto &s : supports)
        {
            SupportSet r;
            r.group = s.group;
            for (auto i : s.indices)
                if (claims[i] == 1)
                    r.indices.push_back(i);
            // Captured power is not known without the channel; callers recompute it
            r.captured = r.indices.size() == s.indices.size() ? s.captured : 0.0;
            out.push_back(std::move(r));
        }
        return out;
    }

    std::vector<std::vector<arma::cx_mat>> cascade_blocks(const std::vector<arma::cx_mat> &uplinks,
                                                          const PreBeamformer &prebeamformer,
                                                          const std::vector<arma::cx_mat> &precoders)
    {
        const std::size_t G = uplinks.size();
        if (prebeamformer.blocks.size() != G || precoders.size() != G)
            throw std::invalid_argument("Cascade needs one uplink, pre-beamformer block and precoder per group.");

        std::vector<std::vector<arma::cx_mat>> out(G, std::vector<arma::cx_mat>(G));
        for (std::size_t m = 0; m < G; ++m)
        {
            if (precoders[m].n_rows != prebeamformer.blocks[m].n_cols)
                throw std::invalid_argument("Precoder of group index " + std::to_string(m) + " has " +
                                            std::to_string(precoders[m].n_rows) + " rows, expected " +
                                            std::to_string(prebeamformer.blocks[m].n_cols) + ".");
            arma::cx_mat BP = prebeamformer.blocks[m] * precoders[m];
            for (std::size_t g = 0; g < G; ++g)
                out[g][m] = uplinks[g].t() * BP;
        }
        return out;
    }

    double interference_ratio(const std::vector<std::vector<arma::cx_mat>> &blocks, std::size_t g)
    {
        const double signal = std::pow(arma::norm(blocks.at(g).at(g), "fro"), 2);
        double interference = 0.0;
        for (std::size_t m = 0; m < blocks[g].size(); ++m)
            if (m != g)
                interference += std::pow(arma::norm(blocks[g][m], "fro"), 2);
        if (signal == 0.0)
            return interference == 0.0 ? 0.0 : arma::datum::inf;
        return interference / signal;
    }
}
