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

#ifndef BEAMSPACE_PRECODER_H
#define BEAMSPACE_PRECODER_H

#include <armadillo>
#include <string>
#include <vector>

#include "beamspace/constellation.hpp"
#include "beamspace/mutual_information.hpp"
#include "beamspace/quadrature.hpp"

namespace beamspace
{
    // P = V diag(d) W. Streams with active[i] == 0 are fictitious: zero power and no symbols.
    struct PrecoderParam
    {
        arma::cx_mat V;          // N_t x n_s right-singular vectors
        arma::vec s;             // Singular values of the downlink channel, descending
        arma::vec d;             // Nonnegative stream amplitudes
        arma::cx_mat W;          // n_s x n_s unitary
        std::vector<char> active;

        arma::uword n_streams() const { return d.n_elem; }
        arma::uword n_active() const;
        arma::cx_mat precoder() const;         // N_t x n_s
        arma::cx_mat active_precoder() const;  // Columns of active streams only
        double power() const;                  // tr(P P^h)
    };

    // SVD of H_dl; d uniform over directions with nonzero singular value, W = I
    PrecoderParam svd_parametrize(const arma::cx_mat &H_dl, double budget, double rel_tol = 1e-8);

    struct OptimizerOptions
    {
        double initial_step = 1.0;
        double shrink = 0.5;
        double slope = 1e-4;
        unsigned max_halvings = 30;
        unsigned max_iterations = 50;
        double tolerance = 1e-4;  // Relative improvement per iteration
        bool multi_start = true;  // Also start from a generic rotation and from the no-precoding Gram
        bool pgp_power_split = true;       // Re-balance the budget across PGP subgroups
        unsigned max_split_iterations = 8;
        MiOptions mi;
    };

    struct TraceRow
    {
        unsigned iteration = 0;
        double objective = 0.0;
        double step_d = 0.0; // 0 when the line search on d failed
        double step_w = 0.0;
    };

    struct OptimizeResult
    {
        PrecoderParam param;
        double bits = 0.0;
        std::vector<TraceRow> trace;
        unsigned iterations = 0;
        bool converged = false;
        std::string status;
        unsigned start = 0; // Index of the start that won
        std::vector<double> start_bits;
    };

    // Maximizes the Gauss-Hermite mutual information of H_dl P over tr(P P^h) = budget
    OptimizeResult optimize_precoder(const arma::cx_mat &H_dl, double noise_variance, const Constellation &constellation,
                                     const QuadratureGrid &grid, double budget, const OptimizerOptions &opts = {});

    // Same ascent from a given parametrization; the mask in param.active is kept
    OptimizeResult optimize_from(const PrecoderParam &start, double noise_variance, const Constellation &constellation,
                                 arma::uword points_per_axis, const OptimizerOptions &opts = {});

    // Mutual information of the reduced channel diag(s o d) W restricted to the active streams
    double param_mutual_information(const PrecoderParam &param, double noise_variance,
                                    const Constellation &constellation, arma::uword points_per_axis,
                                    const MiOptions &opts = {});

    struct PgpSubgroup
    {
        std::vector<arma::uword> streams; // Parent stream indices, descending singular value
        arma::uword n_fictitious = 0;
        EffectiveChannel channel;          // diag of the subgroup singular values, fictitious rows zero
        double budget = 0.0;
    };

    struct PgpPlan
    {
        arma::uword n_p = 2;
        arma::uword rank = 0;
        std::vector<PgpSubgroup> subgroups;
        arma::uword n_fictitious() const;
    };

    PgpPlan pgp_partition(const PrecoderParam &param, arma::uword n_p, double noise_variance, double rel_tol = 1e-8);

    struct PgpResult
    {
        PgpPlan plan;
        std::vector<OptimizeResult> subgroups;
        double bits = 0.0;       // Sum over subgroups; fictitious inputs carry nothing
        unsigned iterations = 0; // Max over subgroups
        unsigned split_iterations = 0;
        arma::cx_mat precoder;   // N_t x n_s
    };

    PgpResult optimize_pgp(const arma::cx_mat &H_dl, double noise_variance, const Constellation &constellation,
                           const QuadratureGrid &grid, double budget, arma::uword n_p,
                           const OptimizerOptions &opts = {});

    arma::cx_mat baseline_no_precoding(const arma::cx_mat &H_dl, double budget);
    arma::cx_mat baseline_plain_beamforming(const arma::cx_mat &H_dl, double budget);
    arma::cx_mat baseline_svapb(const arma::cx_mat &H_dl, double budget, double rel_tol = 1e-8);

    // Unitary polar factor of a square matrix
    arma::cx_mat polar_unitary(const arma::cx_mat &X);
}

#endif
