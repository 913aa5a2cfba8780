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

#include "beamspace/precoder.hpp"

#include <cmath>
#include <random>

using namespace beamspace;
using Catch::Matchers::WithinAbs;

namespace
{
    arma::cx_mat random_channel(arma::uword r, arma::uword c, unsigned seed)
    {
        std::mt19937_64 gen(seed);
        std::normal_distribution<double> n(0.0, std::sqrt(0.5));
        arma::cx_mat G(r, c);
        for (auto &g : G)
            g = {n(gen), n(gen)};
        return G;
    }

    // Strongly correlated 2x2: both receive antennas see nearly the same direction
    arma::cx_mat correlated_channel(unsigned seed)
    {
        const arma::cx_mat a = random_channel(2, 1, seed);
        const arma::cx_mat b = random_channel(1, 2, seed + 1000);
        return a * b + 0.15 * random_channel(2, 2, seed + 2000);
    }

    double mi_of(const arma::cx_mat &H, const arma::cx_mat &P, double nv, const Constellation &c)
    {
        return mutual_information_gh({H * P, nv}, c, QuadratureGrid(H.n_rows, 3));
    }

    void check_result_invariants(const OptimizeResult &r, double budget)
    {
        CHECK_THAT(r.param.power(), WithinAbs(budget, 1e-8));
        CHECK(arma::norm(r.param.W.t() * r.param.W - arma::eye<arma::cx_mat>(r.param.W.n_rows, r.param.W.n_rows), "fro") < 1e-8);
        CHECK(arma::all(r.param.d >= 0.0));
        for (std::size_t i = 1; i < r.trace.size(); ++i)
            CHECK(r.trace[i].objective >= r.trace[i - 1].objective - 1e-12);
    }
}

TEST_CASE("SVD parametrization of a diagonal channel", "[svd]")
{
    arma::cx_mat H(2, 2, arma::fill::zeros);
    H(0, 0) = 2.0;
    H(1, 1) = 1.0;
    const PrecoderParam p = svd_parametrize(H, 2.0);
    CHECK(arma::norm(arma::abs(p.V) - arma::eye(2, 2), "fro") < 1e-12);
    CHECK_THAT(p.power(), WithinAbs(2.0, 1e-9));
    CHECK(arma::approx_equal(p.W, arma::eye<arma::cx_mat>(2, 2), "absdiff", 0.0));
}

TEST_CASE("SVD parametrization: budget and singular values", "[svd][property]")
{
    for (unsigned s = 0; s < 10; ++s)
    {
        const arma::cx_mat H = random_channel(2, 4, s);
        const PrecoderParam p = svd_parametrize(H, 3.0);
        CHECK_THAT(p.power(), WithinAbs(3.0, 1e-9));
        const arma::vec sv = arma::svd(arma::cx_mat(H * p.precoder()));
        CHECK(arma::norm(arma::sort(sv, "descend") - arma::sort(p.s % p.d, "descend")) < 1e-9);
    }
    CHECK_THROWS_AS(svd_parametrize(arma::cx_mat(2, 2, arma::fill::zeros), 1.0), std::invalid_argument);
}

TEST_CASE("Scalar channel: optimization cannot change the objective", "[optimize]")
{
    const arma::cx_mat H(1, 1, arma::fill::value(std::complex<double>(0.3, 0.4)));
    const auto c = Constellation::qam(4);
    const auto r = optimize_precoder(H, 0.5, c, QuadratureGrid(1, 3), 1.0);
    CHECK_THAT(r.bits, WithinAbs(mi_of(H, arma::cx_mat(1, 1, arma::fill::ones), 0.5, c), 1e-9));
    check_result_invariants(r, 1.0);
}

TEST_CASE("Optimizer contract on random channels", "[optimize][property]")
{
    const auto c = Constellation::qam(16);
    for (unsigned s = 0; s < 6; ++s)
    {
        const arma::cx_mat H = random_channel(2, 3, 40 + s);
        const double nv = std::pow(10.0, -(double(s) * 4.0 - 5.0) / 10.0);
        const auto r = optimize_precoder(H, nv, c, QuadratureGrid(2, 3), 2.0);
        check_result_invariants(r, 2.0);
        CHECK(r.iterations <= 50);
        CHECK(!r.status.empty());
        CHECK_THAT(r.bits, WithinAbs(mi_of(H, r.param.precoder(), nv, c), 1e-9));
    }
}

TEST_CASE("Method ordering on 2x2 channels", "[optimize][baseline][property]")
{
    const auto c = Constellation::qam(16);
    for (unsigned s = 0; s < 4; ++s)
    {
        // Rank-one channels make plain beamforming waste power on a dead direction
        arma::cx_mat H = random_channel(2, 1, 60 + s) * random_channel(1, 2, 70 + s);
        if (s % 2 == 1)
            H = random_channel(2, 2, 80 + s);
        for (double snr : {-5.0, 5.0, 15.0})
        {
            const double nv = std::pow(10.0, -snr / 10.0);
            const auto r = optimize_precoder(H, nv, c, QuadratureGrid(2, 3), 2.0);
            const double none = mi_of(H, baseline_no_precoding(H, 2.0), nv, c);
            const double plain = mi_of(H, baseline_plain_beamforming(H, 2.0), nv, c);
            const double svapb = mi_of(H, baseline_svapb(H, 2.0), nv, c);
            CHECK(r.bits >= svapb - 1e-6);
            CHECK(r.bits >= none - 1e-6);
            if (s % 2 == 0)
                CHECK(svapb >= plain - 1e-6);
        }
    }
}

TEST_CASE("Type-I gain on correlated channels at low SNR", "[optimize][type]")
{
    const auto c = Constellation::qam(16);
    const double nv = std::pow(10.0, 1.0); // -10 dB
    int with_gain = 0;
    for (unsigned s = 0; s < 3; ++s)
    {
        const arma::cx_mat H = correlated_channel(s);
        const auto r = optimize_precoder(H, nv, c, QuadratureGrid(2, 3), 2.0);
        const double none = mi_of(H, baseline_no_precoding(H, 2.0), nv, c);
        CHECK(r.bits > none);
        with_gain += r.bits >= 1.2 * none ? 1 : 0;
    }
    CHECK(with_gain >= 1);
}

TEST_CASE("Type-II gain on a rank-deficient channel at high SNR", "[optimize][type]")
{
    // Second beam carries nothing: no precoding loses one whole stream
    arma::cx_mat H(2, 2, arma::fill::zeros);
    H(0, 0) = {1.0, 0.2};
    H(1, 0) = {0.6, -0.5};
    const auto c = Constellation::qam(4);
    const double nv = std::pow(10.0, -2.0);
    const auto r = optimize_precoder(H, nv, c, QuadratureGrid(2, 3), 2.0);
    const double none = mi_of(H, baseline_no_precoding(H, 2.0), nv, c);
    CHECK(none <= 2.0 + 1e-9);
    CHECK(r.bits > none + 0.5);
}

TEST_CASE("Baselines", "[baseline]")
{
    const arma::cx_mat H = random_channel(2, 3, 5);
    const arma::cx_mat N = baseline_no_precoding(H, 2.0);
    CHECK(N.n_rows == 3);
    CHECK(N.n_cols == 2);
    CHECK_THAT(std::real(arma::trace(N * N.t())), WithinAbs(2.0, 1e-12));
    CHECK_THAT(std::abs(N(0, 0)), WithinAbs(1.0, 1e-12));

    // Full rank: plain equals the initial parametrization and SVAPB
    const arma::cx_mat Pl = baseline_plain_beamforming(H, 2.0);
    CHECK(arma::norm(Pl - svd_parametrize(H, 2.0).precoder(), "fro") < 1e-12);
    CHECK(arma::norm(Pl - baseline_svapb(H, 2.0), "fro") < 1e-12);
    CHECK_THAT(std::real(arma::trace(Pl * Pl.t())), WithinAbs(2.0, 1e-12));

    // Rank one: SVAPB puts all power on one direction
    const arma::cx_mat R = random_channel(2, 1, 6) * random_channel(1, 3, 7);
    const PrecoderParam p = svd_parametrize(R, 2.0);
    CHECK_THAT(p.d[0] * p.d[0], WithinAbs(2.0, 1e-9));
    CHECK(p.d[1] == 0.0);
    const arma::cx_mat Sv = baseline_svapb(R, 2.0);
    CHECK_THAT(std::pow(arma::norm(Sv.col(0)), 2), WithinAbs(2.0, 1e-9));
}

TEST_CASE("PGP partition rules", "[pgp]")
{
    // Rank 3 of 4: {s1, s2}, {s3, s4 = 0}
    arma::cx_mat H(4, 4, arma::fill::zeros);
    H(0, 0) = 3.0;
    H(1, 1) = 2.0;
    H(2, 2) = 1.0;
    const PrecoderParam p = svd_parametrize(H, 4.0);
    const PgpPlan plan = pgp_partition(p, 2, 1.0);
    REQUIRE(plan.subgroups.size() == 2);
    CHECK(plan.rank == 3);
    CHECK(plan.subgroups[0].streams == std::vector<arma::uword>{0, 1});
    CHECK(plan.subgroups[1].streams == std::vector<arma::uword>{2, 3});
    CHECK(plan.n_fictitious() == 0);
    CHECK_THAT(plan.subgroups[1].channel.matrix(1, 1).real(), WithinAbs(0.0, 1e-12));

    // Odd stream count pads one fictitious input
    const PrecoderParam q = svd_parametrize(arma::cx_mat(H.submat(0, 0, 2, 2)), 3.0);
    const PgpPlan padded = pgp_partition(q, 2, 1.0);
    CHECK(padded.subgroups.size() == 2);
    CHECK(padded.n_fictitious() == 1);
    CHECK(padded.subgroups[1].n_fictitious == 1);

    // n_p equal to the stream count is one joint block
    const PgpPlan joint = pgp_partition(p, 4, 1.0);
    CHECK(joint.subgroups.size() == 1);
    double total = 0.0;
    for (const auto &g : plan.subgroups)
        total += g.budget;
    CHECK_THAT(total, WithinAbs(4.0, 1e-9));
}

TEST_CASE("PGP with one subgroup is the joint optimization", "[pgp]")
{
    const auto c = Constellation::qam(4);
    const arma::cx_mat H = random_channel(2, 2, 21);
    const auto pg = optimize_pgp(H, 0.5, c, QuadratureGrid(2, 3), 2.0, 2);
    const auto jt = optimize_precoder(H, 0.5, c, QuadratureGrid(2, 3), 2.0);
    CHECK_THAT(pg.bits, WithinAbs(jt.bits, 1e-3));
}

TEST_CASE("PGP never beats the joint optimum by more than quadrature noise", "[pgp][property]")
{
    const auto c = Constellation::qam(4);
    const arma::cx_mat H = random_channel(3, 3, 33);
    for (double snr : {-5.0, 10.0})
    {
        const double nv = std::pow(10.0, -snr / 10.0);
        const auto pg = optimize_pgp(H, nv, c, QuadratureGrid(3, 3), 3.0, 2);
        const auto jt = optimize_precoder(H, nv, c, QuadratureGrid(3, 3), 3.0);
        CHECK(pg.bits <= jt.bits + 0.1);
        CHECK_THAT(std::real(arma::trace(pg.precoder * pg.precoder.t())), WithinAbs(3.0, 1e-6));
    }
}

TEST_CASE("Polar factor is unitary", "[util]")
{
    const arma::cx_mat U = polar_unitary(random_channel(3, 3, 2));
    CHECK(arma::norm(U.t() * U - arma::eye<arma::cx_mat>(3, 3), "fro") < 1e-12);
}
