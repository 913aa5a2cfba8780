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

#ifndef BEAMSPACE_MUTUAL_INFORMATION_H
#define BEAMSPACE_MUTUAL_INFORMATION_H

#include <armadillo>
#include <cstdint>
#include <stdexcept>

#include "beamspace/constellation.hpp"
#include "beamspace/quadrature.hpp"

namespace beamspace
{
    // y = G x + n, n ~ CN(0, noise_variance I), x uniform over the M^N_t symbol vectors
    struct EffectiveChannel
    {
        arma::cx_mat matrix;
        double noise_variance = 1.0;

        arma::uword n_receive() const { return matrix.n_rows; }
        arma::uword n_streams() const { return matrix.n_cols; }
    };

    // Thrown when an evaluation would exceed the desk-scale limits
    class GuardViolation : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct MiOptions
    {
        bool allow_large_alphabet = false;    // Permit M^N_t above 2^20
        bool allow_large_quadrature = false;  // Permit more than ~2^31 kernel evaluations
        unsigned n_threads = 1;               // Results do not depend on this
        bool use_symmetry = true;             // Sum over quarter-turn orbits when the alphabet allows it
    };

    inline constexpr double kMaxAlphabet = 1048576.0;   // 2^20
    inline constexpr double kMaxKernelCost = 2147483648.0; // 2^31

    struct MiEvaluation
    {
        double bits = 0.0;
        arma::cx_mat gradient; // dI/dG* in bits, empty unless requested
        arma::cx_mat mmse;     // Error covariance, empty unless requested
    };

    struct McEstimate
    {
        double bits = 0.0;
        double standard_error = 0.0;
        std::size_t n_samples = 0;
    };

    // All M^N_t symbol vectors as columns; stream 0 is the fastest digit
    arma::cx_mat symbol_table(const Constellation &constellation, arma::uword n_streams);

    // Throws GuardViolation if the alphabet M^N_t is too large
    void check_alphabet_guard(const Constellation &constellation, arma::uword n_streams, const MiOptions &opts = {});

    // Gauss-Hermite evaluation on the Gram square root of G, which makes the result exactly
    // invariant to left-unitary rotations of G
    MiEvaluation evaluate_mi(const EffectiveChannel &channel, const Constellation &constellation,
                             const QuadratureGrid &grid, bool with_gradient, bool with_mmse,
                             const MiOptions &opts = {});

    double mutual_information_gh(const EffectiveChannel &channel, const Constellation &constellation,
                                 const QuadratureGrid &grid, const MiOptions &opts = {});

    McEstimate mutual_information_mc(const EffectiveChannel &channel, const Constellation &constellation,
                                     std::size_t n_samples, std::uint64_t seed, const MiOptions &opts = {});

    arma::cx_mat mmse_matrix(const EffectiveChannel &channel, const Constellation &constellation,
                             const QuadratureGrid &grid, const MiOptions &opts = {});

    // dI/dP* for G = H P, in bits
    arma::cx_mat mi_gradient(const arma::cx_mat &H, const arma::cx_mat &P, double noise_variance,
                             const Constellation &constellation, const QuadratureGrid &grid,
                             const MiOptions &opts = {});

    // (log2 e / sigma^2) H^h H P E
    arma::cx_mat mi_gradient_mmse_form(const arma::cx_mat &H, const arma::cx_mat &P, double noise_variance,
                                       const Constellation &constellation, const QuadratureGrid &grid,
                                       const MiOptions &opts = {});
}

#endif
