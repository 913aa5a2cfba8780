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

#include "beamspace/report.hpp"
#include "beamspace/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace beamspace;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace
{
    const std::string kMinimal = R"(name: minimal
seed: 1
geometry: {array: ula, elements: 100, spacing: 0.5}
constellation: 4
snr_db: [0, 5, 10]
methods: [none]
groups:
  - {id: 1, theta_deg: 60, theta_spread_deg: 4, paths: 3, users: [2]}
)";

    std::vector<Diagnostic> diagnostics_of(const std::string &text)
    {
        try
        {
            parse_scenario(text, "t.yaml");
        }
        catch (const ConfigError &e)
        {
            return e.diagnostics();
        }
        return {};
    }

    bool has_field(const std::vector<Diagnostic> &d, const std::string &field)
    {
        return std::any_of(d.begin(), d.end(), [&](const Diagnostic &x)
                           { return x.field == field; });
    }

    std::string source_path(const std::string &rel)
    {
        return std::string(BEAMSPACE_SOURCE_DIR) + "/" + rel;
    }
}

TEST_CASE("Minimal config parses", "[config]")
{
    const ScenarioRun r = parse_scenario(kMinimal);
    CHECK(r.name == "minimal");
    CHECK(r.seed == 1);
    CHECK(r.constellation == 4);
    CHECK(r.geometry.n_elements() == 100);
    REQUIRE(r.groups.size() == 1);
    CHECK_THAT(r.groups[0].scenario.theta, WithinAbs(deg_to_rad(60.0), 1e-15));
    CHECK(r.groups[0].scenario.user_antennas == std::vector<arma::uword>{2});
    CHECK(r.snr_db == std::vector<double>{0.0, 5.0, 10.0});
    CHECK(r.methods_for(0) == std::vector<Method>{Method::None});
    CHECK(!r.ofdm.enabled);
}

TEST_CASE("Shipped configs parse", "[config]")
{
    for (const char *f : {"configs/ula_5group.yaml", "configs/upa_8group_release.yaml", "configs/upa_ofdm_3group.yaml"})
    {
        INFO(f);
        CHECK(validate_config(source_path(f)).empty());
    }
    const ScenarioRun u = load_scenario(source_path("configs/upa_8group_release.yaml"));
    CHECK(u.geometry.is_planar());
    CHECK(u.groups.size() == 8);
    const ScenarioRun o = load_scenario(source_path("configs/upa_ofdm_3group.yaml"));
    CHECK(o.ofdm.enabled);
    CHECK(o.ofdm.cfsdm);
}

TEST_CASE("Diagnostics carry line, column and field", "[config]")
{
    const auto d = diagnostics_of(R"(name: x
seed: 1
geometry: {array: ula, elements: 100, spacing: 0.5}
constellation: 32
snr_db: [0]
methods: [none]
groups:
  - {id: 1, theta_deg: 60, theta_spread_deg: 4, paths: 3, users: [2]}
)");
    REQUIRE(d.size() == 1);
    CHECK(d[0].field == "constellation");
    CHECK(d[0].line == 4);
    CHECK(d[0].column == 16);
    CHECK_THAT(d[0].str(), ContainsSubstring("t.yaml:4:16: constellation:"));
}

TEST_CASE("Missing, unknown and out-of-range fields", "[config]")
{
    std::string no_seed = kMinimal;
    no_seed.erase(no_seed.find("seed: 1\n"), 8);
    CHECK(has_field(diagnostics_of(no_seed), "seed"));

    CHECK(has_field(diagnostics_of(kMinimal + "colour: red\n"), "colour"));

    std::string bad_array = kMinimal;
    bad_array.replace(bad_array.find("array: ula"), 10, "array: hex");
    CHECK(has_field(diagnostics_of(bad_array), "geometry.array"));

    CHECK(!diagnostics_of(kMinimal + "mc_samples: 50\n").empty());
    CHECK(diagnostics_of(kMinimal + "mc_samples: 10000\n").empty());
    CHECK(!diagnostics_of("just a string").empty());
    CHECK(!diagnostics_of("a: [1, 2").empty());
}

TEST_CASE("Several problems are reported together", "[config]")
{
    std::string text = kMinimal;
    text.replace(text.find("constellation: 4"), 16, "constellation: 8");
    text += "bogus: 1\n";
    CHECK(diagnostics_of(text).size() >= 2);
}

TEST_CASE("Guard violation names group, method and limit", "[guard]")
{
    const ScenarioRun r = load_scenario(source_path("tests/data/guard.yaml"));
    const auto prep = prepare_scenario(r);
    try
    {
        check_guards(r, prep);
        FAIL("expected a guard violation");
    }
    catch (const GuardViolation &e)
    {
        const std::string msg = e.what();
        CHECK_THAT(msg, ContainsSubstring("group 1"));
        CHECK_THAT(msg, ContainsSubstring("none"));
        CHECK_THAT(msg, ContainsSubstring("2^20"));
    }
}

TEST_CASE("Minimal run covers every cell", "[run]")
{
    const ScenarioRun r = parse_scenario(kMinimal);
    const RunReport rep = run_scenario(r, 1);
    REQUIRE(rep.cells.size() == 3);
    for (const auto &c : rep.cells)
    {
        CHECK(c.ok);
        CHECK(c.mi_bits >= 0.0);
        CHECK(c.mi_bits <= 2.0 * std::log2(4.0) + 1e-9);
        CHECK_THAT(c.snr_b_db, WithinAbs(c.snr_s_db - 10.0 * std::log10(2.0), 1e-12));
    }
    CHECK(rep.cells[0].mi_bits < rep.cells[2].mi_bits);
    const std::string csv = results_csv(rep);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.rfind("group,user,method,snr_s_db,snr_b_db,mi_bits,iters,rho,support_size\n", 0) == 0);
}

TEST_CASE("Results do not depend on the thread count", "[run][determinism]")
{
    std::string text = kMinimal;
    text.replace(text.find("methods: [none]"), 15, "methods: [none, plain, svapb]");
    const ScenarioRun r = parse_scenario(text);
    const std::string a = results_csv(run_scenario(r, 1));
    const std::string b = results_csv(run_scenario(r, 3));
    CHECK(a == b);
}

TEST_CASE("Artifacts are written", "[run][report]")
{
    const ScenarioRun r = parse_scenario(kMinimal);
    const RunReport rep = run_scenario(r, 1);
    const auto dir = std::filesystem::temp_directory_path() / "beamspace_artifacts_test";
    std::filesystem::remove_all(dir);
    write_artifacts(rep, dir.string(), true);
    for (const char *f : {"results.csv", "traces.csv", "supports.json", "report.json", "plot_g1.svg"})
        CHECK(std::filesystem::exists(dir / f));
    CHECK(!std::filesystem::exists(dir / "assignment.json"));
    std::ifstream svg(dir / "plot_g1.svg");
    std::stringstream ss;
    ss << svg.rdbuf();
    CHECK_THAT(ss.str(), ContainsSubstring("<polyline"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("SNR per bit", "[run]")
{
    CHECK_THAT(snr_b_db(10.0, 16), WithinAbs(10.0 - 10.0 * std::log10(4.0), 1e-12));
    CHECK_THAT(snr_b_db(0.0, 4), WithinAbs(-3.0102999566398120, 1e-12));
}
