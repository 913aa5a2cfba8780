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

#include "beamspace/report.hpp"
#include "beamspace/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{
    constexpr int kOk = 0;
    constexpr int kConfigError = 2;
    constexpr int kGuardViolation = 3;

    int report_config_error(const beamspace::ConfigError &e)
    {
        for (const auto &d : e.diagnostics())
            std::cerr << d.str() << "\n";
        return kConfigError;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Beamspace JSDM precoding experiments"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string out_dir;
    bool no_plots = false;

    auto *run = app.add_subcommand("run", "Run a scenario and write its reports");
    run->add_option("config", config, "Scenario file (YAML)")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    run->add_option("--out", out_dir, "Output directory (default: the scenario's output field)");
    run->add_flag("--no-plots", no_plots, "Skip SVG plots");

    auto *validate = app.add_subcommand("validate", "Check a scenario file and its desk-scale limits");
    validate->add_option("config", config, "Scenario file (YAML)")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try
    {
        beamspace::ScenarioRun scenario = beamspace::load_scenario(config);
        if (seed)
            scenario.seed = *seed;

        if (validate->parsed())
        {
            beamspace::check_guards(scenario, beamspace::prepare_scenario(scenario));
            std::cout << config << ": ok\n";
            return kOk;
        }

        const auto report = beamspace::run_scenario(scenario, threads);
        const std::string dir = out_dir.empty() ? scenario.output : out_dir;
        beamspace::write_artifacts(report, dir, !no_plots);

        std::size_t failed = 0;
        for (const auto &c : report.cells)
            failed += c.ok ? 0 : 1;
        std::cout << report.cells.size() << " cells, " << failed << " failed, written to " << dir << "\n";
        return kOk;
    }
    catch (const beamspace::ConfigError &e)
    {
        return report_config_error(e);
    }
    catch (const beamspace::GuardViolation &e)
    {
        std::cerr << "refused: " << e.what() << "\n";
        return kGuardViolation;
    }
    catch (const beamspace::CapacityError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
