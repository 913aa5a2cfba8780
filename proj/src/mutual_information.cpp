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

#include "beamspace/mutual_information.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

namespace beamspace
{
    namespace
    {
        using cx = std::complex<double>;

        // exp(-50) relative to the dominant term is below double resolution of the sum
        constexpr double kPruneExponent = -50.0;

        struct Neumaier
        {
            double sum = 0.0, c = 0.0;
            void add(double v)
            {
                const double t = sum + v;
                if (std::abs(sum) >= std::abs(v))
                    c += (sum - t) + v;
                else
                    c += (v - t) + sum;
                sum = t;
            }
            double value() const { return sum + c; }
        };

        struct ChunkResult
        {
            Neumaier log_sum;
            arma::cx_mat a1; // Sum of w [(x_k - xh)(x_k - xh)^h + C - xh xh^h]
            arma::cx_mat a2; // Sum of w t (x_k - xh)^h, t the unit-variance node
            arma::cx_mat e;  // Sum of w (x_k - xh)(x_k - xh)^h
        };

        double alphabet_size(const Constellation &c, arma::uword n_streams)
        {
            return std::pow(double(c.order()), double(n_streams));
        }

        // Fixed unitary for each dimension; rotating the canonical root away from the
        // constellation axes keeps the tensor rule from aligning with the QAM lattice
        arma::cx_mat fixed_rotation(arma::uword n)
        {
            detail::Stream st(detail::derive_seed(0x51554144ULL, {std::int64_t(n)}));
            arma::cx_mat Z(n, n);
            for (auto &z : Z)
                z = st.complex_normal();
            arma::cx_mat Q, R;
            arma::qr(Q, R, Z);
            for (arma::uword j = 0; j < n; ++j)
            {
                const double a = std::abs(R(j, j));
                if (a > 0.0)
                    Q.col(j) *= R(j, j) / a;
            }
            return Q;
        }

        // Canonical factor U0 A^(1/2) of the Gram matrix A = G^h G; depends on G only through A
        struct GramRoot
        {
            arma::cx_mat R;  // U0 A^(1/2)
            arma::cx_mat U0;
            arma::cx_mat Q;  // Eigenvectors of A
            arma::vec s;     // Square roots of the eigenvalues
        };

        GramRoot gram_root(const arma::cx_mat &G)
        {
            arma::cx_mat A = G.t() * G;
            A = 0.5 * (A + A.t());
            arma::vec lambda;
            GramRoot g;
            if (!arma::eig_sym(lambda, g.Q, A))
                throw std::runtime_error("Eigen-decomposition of the Gram matrix failed.");
            g.s = arma::sqrt(arma::clamp(lambda, 0.0, arma::datum::inf));
            g.U0 = fixed_rotation(G.n_cols);
            g.R = g.U0 * g.Q * arma::diagmat(arma::conv_to<arma::cx_vec>::from(g.s)) * g.Q.t();
            return g;
        }

        void run_chunk(const arma::cx_mat &R, const arma::cx_mat &X, const arma::cx_mat &S, const TensorNodes &nodes,
                       double sigma, const arma::uword *k_list, arma::uword n_k, bool posterior, ChunkResult &out)
        {
            const arma::uword n = R.n_rows, nt = X.n_rows, K = X.n_cols;
            const double sigma2 = sigma * sigma;
            const cx *xs = X.memptr();
            const cx *ss = S.memptr();

            std::vector<double> expo(K);
            std::vector<cx> y(n), nv(n), xh(nt);
            arma::cx_mat C(nt, nt);

            if (posterior)
            {
                out.a1.zeros(nt, nt);
                out.a2.zeros(n, nt);
                out.e.zeros(nt, nt);
            }

            for (arma::uword kk = 0; kk < n_k; ++kk)
            {
                const arma::uword k = k_list[kk];
                const cx *sk = ss + k * n;
                const cx *xk = xs + k * nt;
                Neumaier per_k;
                for (arma::uword node = 0; node < nodes.size(); ++node)
                {
                    const cx *t = &nodes.values[node * n];
                    double nn = 0.0;
                    for (arma::uword i = 0; i < n; ++i)
                    {
                        nv[i] = sigma * t[i];
                        y[i] = sk[i] + nv[i];
                        nn += std::norm(nv[i]);
                    }

                    double emax = -arma::datum::inf;
                    for (arma::uword m = 0; m < K; ++m)
                    {
                        const cx *sm = ss + m * n;
                        double d = 0.0;
                        for (arma::uword i = 0; i < n; ++i)
                            d += std::norm(y[i] - sm[i]);
                        const double e = -(d - nn) / sigma2;
                        expo[m] = e;
                        emax = std::max(emax, e);
                    }

                    double z = 0.0;
                    for (arma::uword m = 0; m < K; ++m)
                    {
                        const double r = expo[m] - emax;
                        expo[m] = r < kPruneExponent ? 0.0 : std::exp(r);
                        z += expo[m];
                    }
                    const double w = nodes.weights[node];
                    per_k.add(w * (emax + std::log(z)));

                    if (!posterior)
                        continue;

                    std::fill(xh.begin(), xh.end(), cx(0.0));
                    C.zeros();
                    for (arma::uword m = 0; m < K; ++m)
                    {
                        if (expo[m] == 0.0)
                            continue;
                        const double p = expo[m] / z;
                        const cx *xm = xs + m * nt;
                        for (arma::uword a = 0; a < nt; ++a)
                        {
                            const cx pa = p * xm[a];
                            xh[a] += pa;
                            for (arma::uword b = 0; b < nt; ++b)
                                C(a, b) += pa * std::conj(xm[b]);
                        }
                    }
                    for (arma::uword a = 0; a < nt; ++a)
                    {
                        const cx da = xk[a] - xh[a];
                        for (arma::uword b = 0; b < nt; ++b)
                        {
                            const cx db = xk[b] - xh[b];
                            const cx outer = da * std::conj(db);
                            out.e(a, b) += w * outer;
                            out.a1(a, b) += w * (outer + C(a, b) - xh[a] * std::conj(xh[b]));
                        }
                    }
                    for (arma::uword i = 0; i < n; ++i)
                        for (arma::uword b = 0; b < nt; ++b)
                            out.a2(i, b) += w * t[i] * std::conj(xk[b] - xh[b]);
                }
                out.log_sum.add(per_k.value());
            }
        }

        // True when the point set is closed under multiplication by j
        bool quarter_turn_symmetric(const Constellation &c)
        {
            const auto &pts = c.points();
            for (const auto &p : pts)
            {
                const cx q = cx(0.0, 1.0) * p;
                bool found = false;
                for (const auto &r : pts)
                    if (std::abs(r - q) < 1e-12)
                    {
                        found = true;
                        break;
                    }
                if (!found || std::abs(p) < 1e-12)
                    return false;
            }
            return true;
        }

        void check_quadrature_guard(arma::uword K, arma::uword n_nodes, const MiOptions &opts)
        {
            const double cost = double(K) * double(K) * double(n_nodes);
            if (cost > kMaxKernelCost && !opts.allow_large_quadrature)
                throw GuardViolation("Quadrature evaluation needs " + std::to_string(cost) +
                                     " kernel evaluations, above the limit of 2^31; set allow_large_quadrature "
                                     "or use the Monte-Carlo estimator.");
        }
    }

    arma::cx_mat symbol_table(const Constellation &constellation, arma::uword n_streams)
    {
        const arma::uword M = constellation.order();
        arma::uword K = 1;
        for (arma::uword i = 0; i < n_streams; ++i)
            K *= M;
        arma::cx_mat X(n_streams, K);
        const auto &pts = constellation.points();
        for (arma::uword k = 0; k < K; ++k)
        {
            arma::uword r = k;
            for (arma::uword t = 0; t < n_streams; ++t)
            {
                X(t, k) = pts[r % M];
                r /= M;
            }
        }
        return X;
    }

    void check_alphabet_guard(const Constellation &constellation, arma::uword n_streams, const MiOptions &opts)
    {
        const double K = alphabet_size(constellation, n_streams);
        if (K > kMaxAlphabet && !opts.allow_large_alphabet)
            throw GuardViolation("Alphabet size M^N_t = " + std::to_string(constellation.order()) + "^" +
                                 std::to_string(n_streams) + " exceeds 2^20; set allow_large_alphabet to override.");
    }

    MiEvaluation evaluate_mi(const EffectiveChannel &channel, const Constellation &constellation,
                             const QuadratureGrid &grid, bool with_gradient, bool with_mmse, const MiOptions &opts)
    {
        const arma::cx_mat &G = channel.matrix;
        if (G.n_rows == 0 || G.n_cols == 0)
            throw std::invalid_argument("Effective channel is empty.");
        if (grid.n_receive() != G.n_rows)
            throw std::invalid_argument("Quadrature grid has " + std::to_string(grid.n_receive()) +
                                        " receive dimensions but the channel has " + std::to_string(G.n_rows) + ".");
        if (!(channel.noise_variance > 0.0))
            throw std::invalid_argument("Noise variance must be positive.");
        if (!G.is_finite())
            throw std::invalid_argument("Effective channel has non-finite entries.");
        check_alphabet_guard(constellation, G.n_cols, opts);

        const arma::uword nt = G.n_cols;
        const GramRoot root = gram_root(G);
        const TensorNodes nodes = grid.tensor(nt);
        const arma::cx_mat X = symbol_table(constellation, nt);
        const arma::uword K = X.n_cols;
        check_quadrature_guard(K, nodes.size(), opts);

        const arma::cx_mat S = root.R * X;
        const double sigma2 = channel.noise_variance;
        const double sigma = std::sqrt(sigma2);
        const bool posterior = with_gradient || with_mmse;

        // Fixed chunking keeps the summation order independent of the thread count
        // The tensor rule is invariant under n -> j n and QAM under x -> j x, so the summand is
        // constant on orbits {j^p x_k}; one representative per orbit (first stream in the first
        // quadrant) with multiplicity 4 gives the same sum.
        std::vector<arma::uword> reps;
        double mult = 1.0;
        if (opts.use_symmetry && quarter_turn_symmetric(constellation))
        {
            for (arma::uword k = 0; k < K; ++k)
                if (X(0, k).real() > 0.0 && X(0, k).imag() >= 0.0)
                    reps.push_back(k);
            mult = 4.0;
        }
        else
        {
            reps.resize(K);
            std::iota(reps.begin(), reps.end(), arma::uword(0));
        }
        const arma::uword n_reps = reps.size();

        const arma::uword n_chunks = std::min<arma::uword>(n_reps, 64);
        std::vector<ChunkResult> parts(n_chunks);
        auto work = [&](arma::uword c) {
            const arma::uword b = c * n_reps / n_chunks, e = (c + 1) * n_reps / n_chunks;
            run_chunk(root.R, X, S, nodes, sigma, reps.data() + b, e - b, posterior, parts[c]);
        };
        const unsigned n_threads = std::max(1u, std::min<unsigned>(opts.n_threads, unsigned(n_chunks)));
        if (n_threads == 1)
        {
            for (arma::uword c = 0; c < n_chunks; ++c)
                work(c);
        }
        else
        {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < n_threads; ++t)
                pool.emplace_back([&, t] {
                    for (arma::uword c = t; c < n_chunks; c += n_threads)
                        work(c);
                });
            for (auto &th : pool)
                th.join();
        }

        Neumaier total;
        for (const auto &p : parts)
            total.add(p.log_sum.value());

        const double cap = double(nt) * constellation.bits_per_symbol();
        MiEvaluation out;
        const double bits = cap - mult * total.value() / (double(K) * std::numbers::ln2);
        out.bits = std::clamp(bits, 0.0, cap);

        if (!posterior)
            return out;

        arma::cx_mat a1(nt, nt, arma::fill::zeros), a2(nt, nt, arma::fill::zeros), e(nt, nt, arma::fill::zeros);
        for (const auto &p : parts)
        {
            a1 += p.a1;
            a2 += p.a2;
            e += p.e;
        }
        a1 *= mult;
        a2 *= mult;
        e *= mult;

        if (with_mmse)
        {
            out.mmse = e / double(K);
            out.mmse = 0.5 * (out.mmse + out.mmse.t());
        }

        if (with_gradient)
        {
            // Derivative of the quadrature approximant with respect to R*, then through the square root
            const arma::cx_mat gamma = (root.R * a1 + sigma * a2) / (double(K) * sigma2 * std::numbers::ln2);
            arma::cx_mat gt = root.Q.t() * root.U0.t() * gamma * root.Q;
            const double tol = 1e-12 * std::max(1.0, arma::max(root.s));
            for (arma::uword i = 0; i < nt; ++i)
                for (arma::uword j = 0; j < nt; ++j)
                {
                    const double den = root.s[i] + root.s[j];
                    gt(i, j) = den > tol ? gt(i, j) / den : cx(0.0);
                }
            const arma::cx_mat xi = root.Q * gt * root.Q.t();
            out.gradient = G * (xi + xi.t());
        }
        return out;
    }

    double mutual_information_gh(const EffectiveChannel &channel, const Constellation &constellation,
                                 const QuadratureGrid &grid, const MiOptions &opts)
    {
        return evaluate_mi(channel, constellation, grid, false, false, opts).bits;
    }

    arma::cx_mat mmse_matrix(const EffectiveChannel &channel, const Constellation &constellation,
                             const QuadratureGrid &grid, const MiOptions &opts)
    {
        return evaluate_mi(channel, constellation, grid, false, true, opts).mmse;
    }

    arma::cx_mat mi_gradient(const arma::cx_mat &H, const arma::cx_mat &P, double noise_variance,
                             const Constellation &constellation, const QuadratureGrid &grid, const MiOptions &opts)
    {
        if (H.n_cols != P.n_rows)
            throw std::invalid_argument("Channel and precoder dimensions do not match.");
        EffectiveChannel ch{H * P, noise_variance};
        return H.t() * evaluate_mi(ch, constellation, grid, true, false, opts).gradient;
    }

    arma::cx_mat mi_gradient_mmse_form(const arma::cx_mat &H, const arma::cx_mat &P, double noise_variance,
                                       const Constellation &constellation, const QuadratureGrid &grid,
                                       const MiOptions &opts)
    {
        if (H.n_cols != P.n_rows)
            throw std::invalid_argument("Channel and precoder dimensions do not match.");
        EffectiveChannel ch{H * P, noise_variance};
        const arma::cx_mat E = mmse_matrix(ch, constellation, grid, opts);
        return (std::numbers::log2e / noise_variance) * H.t() * H * P * E;
    }

    McEstimate mutual_information_mc(const EffectiveChannel &channel, const Constellation &constellation,
                                     std::size_t n_samples, std::uint64_t seed, const MiOptions &opts)
    {
        const arma::cx_mat &G = channel.matrix;
        if (G.n_rows == 0 || G.n_cols == 0)
            throw std::invalid_argument("Effective channel is empty.");
        if (!(channel.noise_variance > 0.0))
            throw std::invalid_argument("Noise variance must be positive.");
        if (n_samples < 2)
            throw std::invalid_argument("Monte-Carlo estimate needs at least two samples.");
        check_alphabet_guard(constellation, G.n_cols, opts);

        const arma::cx_mat X = symbol_table(constellation, G.n_cols);
        const arma::uword K = X.n_cols, n = G.n_rows;
        const arma::cx_mat S = G * X;
        const cx *ss = S.memptr();
        const double sigma2 = channel.noise_variance;

        detail::Stream rng(detail::derive_seed(seed, {0x4d43}));
        std::vector<double> expo(K);
        std::vector<cx> y(n), nv(n);
        Neumaier sum, sum_sq;
        for (std::size_t s = 0; s < n_samples; ++s)
        {
            const arma::uword k = arma::uword(rng.next() % K);
            double nn = 0.0;
            for (arma::uword i = 0; i < n; ++i)
            {
                nv[i] = rng.complex_normal(sigma2);
                y[i] = ss[k * n + i] + nv[i];
                nn += std::norm(nv[i]);
            }
            double emax = -arma::datum::inf;
            for (arma::uword m = 0; m < K; ++m)
            {
                const cx *sm = ss + m * n;
                double d = 0.0;
                for (arma::uword i = 0; i < n; ++i)
                    d += std::norm(y[i] - sm[i]);
                expo[m] = -(d - nn) / sigma2;
                emax = std::max(emax, expo[m]);
            }
            double z = 0.0;
            for (arma::uword m = 0; m < K; ++m)
            {
                const double r = expo[m] - emax;
                if (r >= kPruneExponent)
                    z += std::exp(r);
            }
            const double v = (emax + std::log(z)) / std::numbers::ln2;
            sum.add(v);
            sum_sq.add(v * v);
        }
        const double N = double(n_samples);
        const double mean = sum.value() / N;
        const double var = std::max(0.0, (sum_sq.value() - N * mean * mean) / (N - 1.0));
        const double cap = double(G.n_cols) * constellation.bits_per_symbol();

        McEstimate out;
        out.bits = std::clamp(cap - mean, 0.0, cap);
        out.standard_error = std::sqrt(var / N);
        out.n_samples = n_samples;
        return out;
    }
}
