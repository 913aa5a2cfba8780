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

#ifndef BEAMSPACE_SCENARIO_H
#define BEAMSPACE_SCENARIO_H

#include "beamspace/channel_synth.hpp"
#include "beamspace/jsdm.hpp"
#include "beamspace/mutual_information.hpp"
#include "beamspace/ofdm_cfsdm.hpp"
#include "beamspace/precoder.hpp"
#include "beamspace/vcm.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamspace
{
    enum class Method
    {
        Optimized,
        Pgp,
        Plain,
        Svapb,
        None
    };

    std::string method_name(Method m);

    struct Diagnostic
    {
        std::string source;
        int line = 0; // 1-based, 0 when unknown
        int column = 0;
        std::string field;
        std::string message;

        std::string str() const;
    };

    class ConfigError : public std::runtime_error
    {
    public:
        explicit ConfigError(std::vector<Diagnostic> diagnostics);
        const std::vector<Diagnostic> &diagnostics() const { return diagnostics_; }

    private:
        std::vector<Diagnostic> diagnostics_;
    };

    struct GroupConfig
    {
        GroupScenario scenario;             // Angles in radians
        std::vector<Method> methods;        // Empty: use the scenario-wide list
    };

    struct OfdmConfig
    {
        bool enabled = false;
        arma::uword n_subcarriers = 64;
        arma::uword n_taps = 3;
        bool cfsdm = true;
    };

    struct ScenarioRun
    {
        std::string name = "scenario";
        ArrayGeometry geometry;
        std::vector<GroupConfig> groups;
        unsigned constellation = 16;
        std::vector<double> snr_db;          // SNR_s
        std::vector<Method> methods;
        arma::uword n_p = 2;
        OfdmConfig ofdm;
        std::uint64_t seed = 1;
        double threshold = 1.0;
        std::string output = "out";
        arma::uword quadrature_points = 3;
        std::size_t mc_samples = 0;          // > 0: Monte-Carlo for cells above the quadrature limit
        bool normalize = true;               // Scale each downlink to ||H||_F^2 = N_r N_t
        bool shared_angles = false;
        MiOptions limits;

        const std::vector<Method> &methods_for(std::size_t group) const;
    };

    ScenarioRun parse_scenario(const std::string &text, const std::string &source = "<string>");
    ScenarioRun load_scenario(const std::string &path);

    // Empty when the file parses and every field is within range
    std::vector<Diagnostic> validate_config(const std::string &path);

    // One decoding unit: a whole group, or one user on its subcarrier under CFSDM
    struct Receiver
    {
        std::size_t group_index = 0;
        int group = 0;
        arma::uword user = 0;                // 0 = joint decoding over the group, else 1-based user
        arma::uword subcarrier = 0;
        arma::cx_mat downlink;               // N_r x |S_g|
        SupportSet support;
    };

    struct PreparedScenario
    {
        std::vector<SupportSet> detected;    // Per group, before overlap handling
        std::vector<SupportSet> supports;    // Per group, as used
        std::vector<double> rho;             // Captured power of the used support
        std::optional<CfsdmAssignment> assignment;
        std::vector<Receiver> receivers;
    };

    // Channels, supports, overlap handling and receivers. Deterministic in the config.
    PreparedScenario prepare_scenario(const ScenarioRun &run);

    // Throws GuardViolation naming the limit when some cell is above the desk-scale limits
    void check_guards(const ScenarioRun &run, const PreparedScenario &prepared);

    struct CellResult
    {
        int group = 0;
        arma::uword user = 0;
        Method method = Method::None;
        double snr_s_db = 0.0;
        double snr_b_db = 0.0;
        double mi_bits = 0.0;
        unsigned iterations = 0;
        double rho = 0.0;
        std::size_t support_size = 0;
        bool ok = true;
        std::string reason;
        bool monte_carlo = false;
        double standard_error = 0.0;
        std::vector<std::vector<TraceRow>> trace; // One per optimized block (PGP: per subgroup)
        arma::uword n_fictitious = 0;
    };

    struct RunReport
    {
        ScenarioRun config;
        PreparedScenario prepared;
        std::vector<CellResult> cells;       // Receiver-major, then method, then SNR
        double wall_seconds = 0.0;
    };

    RunReport run_scenario(const ScenarioRun &run, unsigned n_threads = 1);

    double snr_b_db(double snr_s_db, unsigned constellation_order);
}

#endif
