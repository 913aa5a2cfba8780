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

#ifndef BEAMSPACE_REPORT_H
#define BEAMSPACE_REPORT_H

#include "beamspace/scenario.hpp"

#include <string>

namespace beamspace
{
    // group,user,method,snr_s_db,snr_b_db,mi_bits,iters,rho,support_size
    // user 0 means joint decoding over the whole group; failed cells carry NA in mi_bits
    std::string results_csv(const RunReport &report);

    // group,user,method,snr_s_db,block,iteration,objective,step_d,step_w
    std::string traces_csv(const RunReport &report);

    // Supports with 1-based bin numbers
    std::string supports_json(const RunReport &report);

    // Summary: cells, failures with reasons, Monte-Carlo cells, wall time
    std::string report_json(const RunReport &report);

    // MI vs SNR_b, one polyline per method, for one receiver (group, user)
    std::string plot_svg(const RunReport &report, int group, arma::uword user);

    // results.csv, traces.csv, supports.json, report.json, assignment.json (CFSDM only)
    // and plot_g<id>[_u<k>].svg unless plots is false. Creates dir if needed.
    void write_artifacts(const RunReport &report, const std::string &dir, bool plots = true);
}

#endif
