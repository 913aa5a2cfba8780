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

#include "beamspace/channel_synth.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

using namespace beamspace;
using Catch::Matchers::WithinAbs;

namespace
{
    constexpr double pi = std::numbers::pi;
}

TEST_CASE("ULA steering at broadside is all ones", "[steering]")
{
    const arma::cx_vec a = steering_ula(pi / 2, 7, 0.37);
    for (auto v : a)
    {
        CHECK_THAT(v.real(), WithinAbs(1.0, 1e-12));
        CHECK_THAT(v.imag(), WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("ULA steering at endfire with half-wavelength spacing", "[steering]")
{
    const arma::cx_vec a = steering_ula(0.0, 2, 0.5);
    CHECK_THAT(a[0].real(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(a[1].real(), WithinAbs(-1.0, 1e-12));
    CHECK_THAT(a[1].imag(), WithinAbs(0.0, 1e-12));
}

TEST_CASE("ULA steering matches the closed form at 30 degrees", "[steering]")
{
    const arma::cx_vec a = steering_ula(deg_to_rad(30.0), 4, 0.5);
    for (arma::uword m = 0; m < 4; ++m)
    {
        const std::complex<double> ref = std::polar(1.0, -pi * double(m) * std::sqrt(3.0) / 2.0);
        CHECK(std::abs(a[m] - ref) < 1e-12);
    }
}

TEST_CASE("Steering vectors have unit-magnitude entries and norm sqrt(N)", "[steering][property]")
{
    for (double th : {0.1, 0.7, 1.3, 2.9})
    {
        const arma::cx_vec a = steering_ula(th, 33, 0.6);
        CHECK(arma::approx_equal(arma::abs(a), arma::vec(33, arma::fill::ones), "absdiff", 1e-12));
        CHECK_THAT(std::pow(arma::norm(a), 2), WithinAbs(33.0, 1e-9));
    }
    const auto geo = ArrayGeometry::upa(ArrayKind::UPA_XY, 4, 5, 0.5);
    const arma::cx_vec b = steering_upa(0.8, 2.1, geo);
    CHECK(b.n_elem == 20);
    CHECK(arma::approx_equal(arma::abs(b), arma::vec(20, arma::fill::ones), "absdiff", 1e-12));
}

TEST_CASE("UPA_ZX steering at theta = 0 has a flat x factor", "[steering]")
{
    const auto geo = ArrayGeometry::upa(ArrayKind::UPA_ZX, 3, 4, 0.5);
    const arma::cx_vec a = steering_upa(0.0, 1.0, geo);
    const arma::cx_vec az = steering_axis(1.0, 3, 0.5);
    CHECK(arma::approx_equal(a, arma::kron(az, arma::cx_vec(4, arma::fill::ones)), "absdiff", 1e-12));
}

TEST_CASE("UPA_XY steering at theta = phi = 90 degrees", "[steering]")
{
    const auto geo = ArrayGeometry::upa(ArrayKind::UPA_XY, 3, 4, 0.5);
    const arma::cx_vec a = steering_upa(pi / 2, pi / 2, geo);
    const arma::cx_vec ay = steering_axis(1.0, 3, 0.5);
    CHECK(arma::approx_equal(a, arma::kron(ay, arma::cx_vec(4, arma::fill::ones)), "absdiff", 1e-12));
}

TEST_CASE("UPA steering equals an element-wise brute-force evaluation", "[steering]")
{
    const double th = deg_to_rad(45.0), ph = deg_to_rad(60.0), D = 0.6;
    for (auto kind : {ArrayKind::UPA_ZX, ArrayKind::UPA_XY})
    {
        const auto geo = ArrayGeometry::upa(kind, 3, 3, D);
        const arma::cx_vec a = steering_upa(th, ph, geo);
        const double uo = kind == ArrayKind::UPA_ZX ? std::cos(th) : std::sin(th) * std::sin(ph);
        const double ux = std::sin(th) * std::cos(ph);
        for (int o = 0; o < 3; ++o)
            for (int x = 0; x < 3; ++x)
            {
                const std::complex<double> ref = std::polar(1.0, -2.0 * pi * D * (o * uo + x * ux));
                CHECK(std::abs(a[o * 3 + x] - ref) < 1e-12);
            }
    }
}

TEST_CASE("steering_upa rejects a linear array", "[steering]")
{
    CHECK_THROWS_AS(steering_upa(0.3, 0.3, ArrayGeometry::ula(8, 0.5)), std::invalid_argument);
}

TEST_CASE("Geometry and scenario validation", "[geometry]")
{
    CHECK_THROWS_AS(ArrayGeometry::ula(0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(ArrayGeometry::ula(8, -1.0), std::invalid_argument);
    GroupScenario g;
    g.n_paths = 0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    GroupScenario h;
    h.user_antennas = {2, 3};
    CHECK(h.n_antennas() == 5);
}

TEST_CASE("Single unit-gain path gives one steering vector per column", "[synth]")
{
    const auto geo = ArrayGeometry::ula(16, 0.5);
    GroupScenario g;
    g.theta = deg_to_rad(50.0);
    g.theta_spread = 0.0;
    g.n_paths = 1;
    g.user_antennas = {2};
    SynthOptions o;
    o.unit_gains = true;
    const arma::cx_mat H = synth_group_channel(g, geo, 4, o);
    for (arma::uword c = 0; c < H.n_cols; ++c)
    {
        CHECK(arma::approx_equal(H.col(c), steering_ula(g.theta, 16, 0.5), "absdiff", 1e-12));
        CHECK_THAT(arma::norm(H.col(c)), WithinAbs(4.0, 1e-12));
    }
}

TEST_CASE("Same seed gives bit-identical channels", "[synth][determinism]")
{
    const auto geo = ArrayGeometry::ula(100, 0.5);
    GroupScenario g;
    g.theta = deg_to_rad(30.0);
    g.theta_spread = deg_to_rad(4.0);
    g.n_paths = 5;
    g.user_antennas = {2, 2};
    const arma::cx_mat A = synth_group_channel(g, geo, 99);
    const arma::cx_mat B = synth_group_channel(g, geo, 99);
    CHECK(std::memcmp(A.memptr(), B.memptr(), sizeof(std::complex<double>) * A.n_elem) == 0);
    const arma::cx_mat C = synth_group_channel(g, geo, 100);
    CHECK(arma::norm(A - C, "fro") > 1.0);
}

TEST_CASE("Groups do not depend on enumeration order", "[synth][determinism]")
{
    const auto geo = ArrayGeometry::ula(64, 0.5);
    GroupScenario a, b;
    a.id = 3;
    b.id = 7;
    a.theta = b.theta = 1.0;
    a.theta_spread = b.theta_spread = 0.05;
    a.n_paths = b.n_paths = 4;
    const arma::cx_mat A1 = synth_group_channel(a, geo, 5);
    const arma::cx_mat B1 = synth_group_channel(b, geo, 5);
    const arma::cx_mat A2 = synth_group_channel(a, geo, 5);
    CHECK(arma::approx_equal(A1, A2, "absdiff", 0.0));
    CHECK(arma::norm(A1 - B1, "fro") > 1.0);
}

TEST_CASE("Mean column energy approaches N_u", "[synth][property]")
{
    const auto geo = ArrayGeometry::ula(100, 0.5);
    GroupScenario g;
    g.theta = deg_to_rad(30.0);
    g.theta_spread = deg_to_rad(4.0);
    g.n_paths = 5;
    g.user_antennas = {1};
    double acc = 0.0;
    const int n = 1000;
    for (int s = 0; s < n; ++s)
        acc += std::pow(arma::norm(synth_group_channel(g, geo, std::uint64_t(s)).col(0)), 2);
    CHECK(std::abs(acc / n / 100.0 - 1.0) < 0.05);
}

TEST_CASE("Angles stay inside the cluster", "[synth][property]")
{
    // With one unit-gain path the column is a steering vector; its phase step gives cos(theta)
    const auto geo = ArrayGeometry::ula(8, 0.5);
    GroupScenario g;
    g.theta = deg_to_rad(70.0);
    g.theta_spread = deg_to_rad(3.0);
    g.n_paths = 1;
    g.user_antennas = {4};
    SynthOptions o;
    o.unit_gains = true;
    for (std::uint64_t s = 0; s < 50; ++s)
    {
        const arma::cx_mat H = synth_group_channel(g, geo, s, o);
        for (arma::uword c = 0; c < H.n_cols; ++c)
        {
            const double step = -std::arg(H(1, c) / H(0, c)) / pi; // = cos(theta) for D = 0.5
            const double th = std::acos(step);
            CHECK(std::abs(th - g.theta) <= g.theta_spread + 1e-9);
        }
    }
}

TEST_CASE("One-tap frequency-selective channel equals the narrowband channel", "[synth][fs]")
{
    const auto geo = ArrayGeometry::ula(32, 0.5);
    GroupScenario g;
    g.theta = 1.1;
    g.theta_spread = 0.05;
    g.n_paths = 3;
    g.user_antennas = {2};
    const auto taps = synth_fs_channel(g, geo, 12, 1);
    REQUIRE(taps.size() == 1);
    CHECK(arma::approx_equal(taps[0], synth_group_channel(g, geo, 12), "absdiff", 0.0));
}

TEST_CASE("Frequency response at q = 0 is the tap sum and matches a direct DFT", "[synth][fs]")
{
    const auto geo = ArrayGeometry::ula(16, 0.5);
    GroupScenario g;
    g.theta = 0.9;
    g.theta_spread = 0.1;
    g.n_paths = 2;
    const auto taps = synth_fs_channel(g, geo, 3, 3);
    CHECK(arma::approx_equal(frequency_response(taps, 0, 64), taps[0] + taps[1] + taps[2], "absdiff", 1e-12));
    for (arma::uword q : {1u, 17u, 63u})
    {
        const arma::cx_mat Hq = frequency_response(taps, q, 64);
        for (arma::uword i = 0; i < Hq.n_rows; ++i)
        {
            std::complex<double> ref = 0.0;
            for (int l = 0; l < 3; ++l)
                ref += taps[l](i, 0) * std::exp(std::complex<double>(0.0, -2.0 * pi * double(q) * l / 64.0));
            CHECK(std::abs(Hq(i, 0) - ref) < 1e-10);
        }
    }
    CHECK_THROWS_AS(frequency_response(taps, 0, 2), std::invalid_argument);
}
