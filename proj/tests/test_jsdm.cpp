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

#include <catch_amalgamated.hpp>

#include "beamspace/jsdm.hpp"

#include <algorithm>
#include <cmath>

using namespace beamspace;
using Catch::Matchers::WithinAbs;

namespace
{
    SupportSet ss(int g, std::vector<arma::uword> one_based)
    {
        SupportSet s;
        s.group = g;
        for (auto i : one_based)
            s.indices.push_back(i - 1);
        return s;
    }

    std::vector<SupportSet> upa_listing()
    {
        return {ss(1, {1, 2, 3, 10, 11, 12, 21, 31, 41, 71, 81, 91}),
                ss(2, {3, 4, 11, 12, 13, 14, 15, 16, 17, 20, 23, 33, 93}),
                ss(3, {3, 4, 14, 94}),
                ss(4, {4, 14, 24, 34, 44, 54, 64, 74, 83, 84, 85, 93, 94, 95}),
                ss(5, {53, 63, 72, 73, 74, 83, 93}),
                ss(6, {62, 72}),
                ss(7, {1, 11, 21, 61, 71, 81, 91, 92, 93, 99, 100}),
                ss(8, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 21, 81, 91, 100})};
    }

    std::vector<GroupScenario> five_clusters()
    {
        std::vector<GroupScenario> out;
        const double th[] = {5, 33, 61, 89, 117};
        const arma::uword ant[] = {4, 2, 4, 4, 6};
        for (int g = 0; g < 5; ++g)
        {
            GroupScenario s;
            s.id = g + 1;
            s.theta = deg_to_rad(th[g]);
            s.theta_spread = deg_to_rad(4.0);
            s.n_paths = 5;
            s.user_antennas = {ant[g]};
            out.push_back(s);
        }
        return out;
    }
}

TEST_CASE("Single-bin pre-beamformer is the first basis column", "[prebeam]")
{
    const DftBasis F(8);
    const auto B = build_prebeamformers({ss(1, {1})}, F);
    CHECK(arma::approx_equal(B.stacked(), arma::cx_mat(F.matrix().col(0)), "absdiff", 0.0));
    CHECK(B.disjoint());
}

TEST_CASE("Overlapping supports give identity blocks exactly on shared bins", "[prebeam]")
{
    const DftBasis F(100);
    const auto sup = upa_listing();
    const auto B = build_prebeamformers(sup, F);
    CHECK_FALSE(B.disjoint());
    for (std::size_t a = 0; a < sup.size(); ++a)
    {
        CHECK(arma::norm(B.blocks[a].t() * B.blocks[a] - arma::eye<arma::cx_mat>(sup[a].size(), sup[a].size()), "fro") < 1e-10);
        for (std::size_t b = a + 1; b < sup.size(); ++b)
        {
            const arma::cx_mat C = B.blocks[a].t() * B.blocks[b];
            for (arma::uword i = 0; i < C.n_rows; ++i)
                for (arma::uword j = 0; j < C.n_cols; ++j)
                {
                    const double expect = sup[a].indices[i] == sup[b].indices[j] ? 1.0 : 0.0;
                    CHECK(std::abs(C(i, j) - expect) < 1e-10);
                }
        }
    }
}

TEST_CASE("Release on an eight-group UPA support listing", "[release]")
{
    const auto out = resolve_overlap_release(upa_listing());
    CHECK(out[0].one_based() == std::vector<arma::uword>{31, 41});
    CHECK(out[5].one_based() == std::vector<arma::uword>{62});
    // Set semantics: 93 is also claimed by groups 2, 4 and 5
    CHECK(out[6].one_based() == std::vector<arma::uword>{61, 92, 99});
    // Bins 5..9 are claimed by group 8 alone
    CHECK(out[7].one_based() == std::vector<arma::uword>{5, 6, 7, 8, 9});
    CHECK(find_overlaps(out).empty());
}

TEST_CASE("Release is idempotent, order independent and trivial on disjoint input", "[release][property]")
{
    const auto once = resolve_overlap_release(upa_listing());
    const auto twice = resolve_overlap_release(once);
    for (std::size_t g = 0; g < once.size(); ++g)
        CHECK(once[g].indices == twice[g].indices);

    auto rev = upa_listing();
    std::reverse(rev.begin(), rev.end());
    const auto r = resolve_overlap_release(rev);
    for (std::size_t g = 0; g < once.size(); ++g)
        CHECK(r[once.size() - 1 - g].indices == once[g].indices);

    const std::vector<SupportSet> disjoint{ss(1, {1, 2}), ss(2, {5})};
    const auto d = resolve_overlap_release(disjoint);
    CHECK(d[0].indices == disjoint[0].indices);
    CHECK(d[1].indices == disjoint[1].indices);

    const auto same = resolve_overlap_release({ss(1, {3, 4}), ss(2, {3, 4})});
    CHECK(same[0].empty());
    CHECK(same[1].empty());
}

TEST_CASE("Five-cluster ULA: orthogonal pre-beamformers and small leakage", "[prebeam][property]")
{
    const auto geo = ArrayGeometry::ula(100, 0.5);
    const DftBasis F(100);
    const auto groups = five_clusters();
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        std::vector<arma::cx_mat> H;
        std::vector<VirtualChannel> vcs;
        std::vector<SupportSet> sup;
        for (const auto &g : groups)
        {
            H.push_back(synth_group_channel(g, geo, seed));
            sup.push_back(detect_support(project_vcm(H.back(), F), 1.0, g.id));
            vcs.push_back(effective_virtual_channel(H.back(), F, sup.back()));
        }
        const auto B = build_prebeamformers(sup, F);
        REQUIRE(B.disjoint());
        const arma::cx_mat S = B.stacked();
        CHECK(arma::norm(S.t() * S - arma::eye<arma::cx_mat>(S.n_cols, S.n_cols), "fro") < 1e-10);

        // Leakage of group g onto the other supports is at most what its own support misses
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (std::size_t m = 0; m < groups.size(); ++m)
                if (m != g)
                    CHECK(power_fraction_on(H[g], F, sup[m].indices) <= 1.0 - sup[g].captured + 1e-12);

        // Cascade with identity-like precoders vs the reduced model
        const auto models = assemble_downlink(vcs, db_to_linear(10.0));
        std::vector<arma::cx_mat> P;
        for (const auto &m : models)
            P.push_back(arma::eye<arma::cx_mat>(m.n_beams(), m.n_beams()));
        const auto blocks = cascade_blocks(H, B, P);
        for (std::size_t g = 0; g < groups.size(); ++g)
        {
            CHECK_THAT(models[g].noise_variance, WithinAbs(0.1, 1e-12));
            CHECK(arma::approx_equal(models[g].channel, vcs[g].matrix.t(), "absdiff", 0.0));
            CHECK(arma::norm(blocks[g][g] - models[g].channel * P[g], "fro") < 1e-9);
            const double rho = sup[g].captured;
            double cross = 0.0;
            for (std::size_t m = 0; m < groups.size(); ++m)
                if (m != g)
                    cross += std::pow(arma::norm(blocks[g][m], "fro"), 2);
            CHECK(std::sqrt(cross) <= std::sqrt(1.0 - rho) * arma::norm(H[g], "fro") + 1e-9);
            if (rho >= 0.9)
                CHECK(interference_ratio(blocks, g) <= 0.1);
        }
    }
}

TEST_CASE("Single-group cascade equals the reduced model exactly", "[cascade]")
{
    arma::arma_rng::set_seed(5);
    const DftBasis F(16);
    const arma::cx_mat H = arma::randn<arma::cx_mat>(16, 2);
    const SupportSet S = ss(1, {2, 3, 4});
    const auto vc = effective_virtual_channel(H, F, S);
    const auto B = build_prebeamformers({S}, F);
    const arma::cx_mat P = arma::randn<arma::cx_mat>(3, 2);
    const auto blocks = cascade_blocks({H}, B, {P});
    CHECK(arma::norm(blocks[0][0] - vc.matrix.t() * P, "fro") < 1e-12);
}

TEST_CASE("Reduction loses no singular values", "[reduction][property]")
{
    arma::arma_rng::set_seed(8);
    const DftBasis F(32);
    const SupportSet S = ss(1, {4, 5, 6, 7, 8});
    for (int t = 0; t < 5; ++t)
    {
        const arma::cx_mat Hv = arma::randn<arma::cx_mat>(5, 3);
        const arma::cx_mat FS = F.columns(S.indices);
        const arma::vec a = arma::svd(arma::cx_mat(Hv.t() * FS.t()));
        const arma::vec b = arma::svd(arma::cx_mat(Hv.t()));
        CHECK(arma::norm(a - b) < 1e-9);
    }
}

TEST_CASE("dB conversion", "[util]")
{
    CHECK_THAT(db_to_linear(10.0), WithinAbs(10.0, 1e-12));
    CHECK_THAT(db_to_linear(-3.0), WithinAbs(0.501187233627, 1e-10));
}
