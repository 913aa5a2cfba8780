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

#include "beamspace/precoder.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace beamspace
{
    namespace
    {
        using cx = std::complex<double>;

        arma::cx_mat generic_unitary(arma::uword n, std::uint64_t key)
        {
            detail::Stream st(detail::derive_seed(key, {std::int64_t(n)}));
            arma::cx_mat Z(n, n);
            for (auto &z : Z)
                z = st.complex_normal();
            return polar_unitary(Z);
        }

        arma::uvec active_indices(const std::vector<char> &active)
        {
            std::vector<arma::uword> idx;
            for (arma::uword i = 0; i < active.size(); ++i)
                if (active[i])
                    idx.push_back(i);
            return arma::uvec(idx);
        }

        // Rotation acting on the active streams only; identity elsewhere
        arma::cx_mat embed_rotation(const std::vector<char> &active, std::uint64_t key)
        {
            const arma::uword n = active.size();
            const arma::uvec a = active_indices(active);
            arma::cx_mat W(n, n, arma::fill::eye);
            if (a.n_elem >= 2)
                W.submat(a, a) = generic_unitary(a.n_elem, key);
            return W;
        }

        struct Objective
        {
            const arma::vec &s;
            arma::uvec cols;
            double noise_variance;
            const Constellation &constellation;
            QuadratureGrid grid;
            MiOptions mi;

            Objective(const PrecoderParam &p, double nv, const Constellation &c, arma::uword L, const MiOptions &o)
                : s(p.s), cols(active_indices(p.active)), noise_variance(nv), constellation(c),
                  grid(std::max<arma::uword>(p.s.n_elem, 1), L), mi(o)
            {
            }

            arma::cx_mat compose(const arma::vec &d, const arma::cx_mat &W) const
            {
                return arma::diagmat(arma::conv_to<arma::cx_vec>::from(s % d)) * W.cols(cols);
            }

            double value(const arma::vec &d, const arma::cx_mat &W) const
            {
                if (cols.is_empty())
                    return 0.0;
                return evaluate_mi({compose(d, W), noise_variance}, constellation, grid, false, false, mi).bits;
            }

            // Value and dI/dG* of the reduced channel, padded with zero columns for inactive streams
            double value_gradient(const arma::vec &d, const arma::cx_mat &W, arma::cx_mat &grad) const
            {
                grad.zeros(s.n_elem, s.n_elem);
                if (cols.is_empty())
                    return 0.0;
                MiEvaluation e = evaluate_mi({compose(d, W), noise_variance}, constellation, grid, true, false, mi);
                grad.cols(cols) = e.gradient;
                return e.bits;
            }
        };

        // dI/dB along a uniform rescaling of d; at an optimum this is the value of extra budget
        double budget_derivative(const PrecoderParam &p, double nv, const Constellation &c, arma::uword L,
                                 const MiOptions &mi)
        {
            Objective obj(p, nv, c, L, mi);
            arma::cx_mat grad;
            obj.value_gradient(p.d, p.W, grad);
            const arma::vec g = 2.0 * p.s % arma::real(arma::diagvec(grad * p.W.t()));
            return arma::dot(g, p.d) / (2.0 * p.power());
        }

        PrecoderParam rescaled(const PrecoderParam &p, double budget)
        {
            PrecoderParam q = p;
            q.d *= std::sqrt(budget / p.power());
            return q;
        }

        PrecoderParam none_matched_start(const arma::cx_mat &H, const PrecoderParam &base, double budget,
                                         double rel_tol)
        {
            const arma::uword ns = base.n_streams();
            const double c2 = budget / double(ns);
            const arma::cx_mat H1 = H.cols(0, ns - 1);
            arma::cx_mat B = c2 * (H1.t() * H1);
            B = 0.5 * (B + B.t());
            arma::vec mu;
            arma::cx_mat Y;
            arma::eig_sym(mu, Y, B);
            mu = arma::flipud(mu);
            Y = arma::fliplr(Y);

            PrecoderParam p = base;
            p.d.zeros(ns);
            const double smax = base.s.max();
            for (arma::uword i = 0; i < ns; ++i)
                if (base.s[i] > rel_tol * smax && mu[i] > 0.0)
                    p.d[i] = std::sqrt(mu[i]) / base.s[i];
            const double e = arma::dot(p.d, p.d);
            if (!(e > 0.0))
                return {};
            p.d *= std::sqrt(budget / e);
            p.W = Y.t();
            return p;
        }

        void check_budget(double budget)
        {
            if (!(budget > 0.0) || !std::isfinite(budget))
                throw std::invalid_argument("Power budget must be positive and finite.");
        }
    }

    arma::cx_mat polar_unitary(const arma::cx_mat &X)
    {
        arma::cx_mat U, V;
        arma::vec s;
        if (!arma::svd(U, s, V, X))
            throw std::runtime_error("SVD failed in polar retraction.");
        return U * V.t();
    }

    arma::uword PrecoderParam::n_active() const
    {
        return arma::uword(std::count(active.begin(), active.end(), char(1)));
    }

    arma::cx_mat PrecoderParam::precoder() const
    {
        return V * arma::diagmat(arma::conv_to<arma::cx_vec>::from(d)) * W;
    }

    arma::cx_mat PrecoderParam::active_precoder() const
    {
        return precoder().cols(active_indices(active));
    }

    double PrecoderParam::power() const
    {
        return arma::dot(d, d);
    }

    PrecoderParam svd_parametrize(const arma::cx_mat &H_dl, double budget, double rel_tol)
    {
        check_budget(budget);
        if (H_dl.is_empty() || !H_dl.is_finite())
            throw std::invalid_argument("Downlink channel must be non-empty and finite.");

        arma::cx_mat U, V;
        arma::vec s;
        if (!arma::svd_econ(U, s, V, H_dl))
            throw std::runtime_error("SVD of the downlink channel failed.");
        if (!(s.max() > 0.0))
            throw std::invalid_argument("Downlink channel has rank 0.");

        PrecoderParam p;
        p.V = V;
        p.s = s;
        const arma::uword ns = s.n_elem;
        const arma::uword r = arma::uword(arma::accu(s > rel_tol * s.max()));
        p.d.zeros(ns);
        p.d.head(r).fill(std::sqrt(budget / double(r)));
        p.W.eye(ns, ns);
        p.active.assign(ns, 1);
        return p;
    }

    double param_mutual_information(const PrecoderParam &param, double noise_variance,
                                    const Constellation &constellation, arma::uword points_per_axis,
                                    const MiOptions &opts)
    {
        Objective obj(param, noise_variance, constellation, points_per_axis, opts);
        return obj.value(param.d, param.W);
    }

    OptimizeResult optimize_from(const PrecoderParam &start, double noise_variance, const Constellation &constellation,
                                 arma::uword points_per_axis, const OptimizerOptions &opts)
    {
        const arma::uword ns = start.n_streams();
        if (start.W.n_rows != ns || start.W.n_cols != ns || start.s.n_elem != ns || start.active.size() != ns)
            throw std::invalid_argument("Inconsistent precoder parametrization.");
        const double budget = start.power();
        check_budget(budget);
        check_alphabet_guard(constellation, start.n_active(), opts.mi);

        Objective obj(start, noise_variance, constellation, points_per_axis, opts.mi);
        arma::vec d = start.d;
        arma::cx_mat W = start.W;
        const arma::uvec act = obj.cols;
        arma::vec mask(ns, arma::fill::zeros);
        mask.elem(act).ones();
        arma::cx_mat pair_mask(ns, ns, arma::fill::zeros);
        pair_mask.submat(act, act).ones();

        OptimizeResult res;
        arma::cx_mat grad;
        double f = obj.value_gradient(d, W, grad);
        res.trace.push_back({0, f, 0.0, 0.0});
        res.status = "max-iterations";

        for (unsigned it = 1; it <= opts.max_iterations; ++it)
        {
            const double f_prev = f;
            TraceRow row{it, f, 0.0, 0.0};

            // Power allocation on the sphere
            arma::vec g = 2.0 * obj.s % arma::real(arma::diagvec(grad * W.t())) % mask;
            arma::vec gt = g - (arma::dot(g, d) / arma::dot(d, d)) * d;
            const double gn = arma::norm(gt);
            if (gn > 1e-14 * std::max(1.0, arma::norm(g)))
            {
                const arma::vec dir = gt * (std::sqrt(budget) / gn);
                double t = opts.initial_step;
                for (unsigned h = 0; h <= opts.max_halvings; ++h, t *= opts.shrink)
                {
                    arma::vec dn = arma::abs(d + t * dir) % mask;
                    const double e = arma::dot(dn, dn);
                    if (!(e > 0.0))
                        continue;
                    dn *= std::sqrt(budget / e);
                    const double slope = arma::dot(g, dn - d);
                    if (!(slope > 0.0))
                        continue;
                    const double fn = obj.value(dn, W);
                    if (fn >= f + opts.slope * slope)
                    {
                        d = dn;
                        f = obj.value_gradient(d, W, grad);
                        row.step_d = t;
                        break;
                    }
                }
            }

            // Rotation on the unitary group
            if (act.n_elem >= 2)
            {
                const arma::cx_mat Z = arma::diagmat(arma::conv_to<arma::cx_vec>::from(obj.s % d)) * grad;
                arma::cx_mat omega = (Z * W.t() - W * Z.t()) % pair_mask;
                arma::cx_mat delta = omega * W;
                const double dn = arma::norm(delta, "fro");
                if (dn > 1e-14 * std::max(1.0, arma::norm(Z, "fro")))
                {
                    delta /= dn;
                    double t = opts.initial_step;
                    for (unsigned h = 0; h <= opts.max_halvings; ++h, t *= opts.shrink)
                    {
                        const arma::cx_mat Wn = polar_unitary(W + t * delta);
                        const double slope = 2.0 * std::real(arma::cdot(Z, Wn - W));
                        if (!(slope > 0.0))
                            continue;
                        const double fn = obj.value(d, Wn);
                        if (fn >= f + opts.slope * slope)
                        {
                            W = Wn;
                            f = obj.value_gradient(d, W, grad);
                            row.step_w = t;
                            break;
                        }
                    }
                }
            }

            row.objective = f;
            res.trace.push_back(row);
            res.iterations = it;
            if (row.step_d == 0.0 && row.step_w == 0.0)
            {
                res.converged = true;
                res.status = "line-search-stalled";
                break;
            }
            if (f - f_prev <= opts.tolerance * std::max(std::abs(f_prev), 1e-12))
            {
                res.converged = true;
                res.status = "tolerance";
                break;
            }
        }

        res.param = start;
        res.param.d = d;
        res.param.W = W;
        res.bits = f;
        return res;
    }

    OptimizeResult optimize_precoder(const arma::cx_mat &H_dl, double noise_variance, const Constellation &constellation,
                                     const QuadratureGrid &grid, double budget, const OptimizerOptions &opts)
    {
        if (grid.n_receive() != H_dl.n_rows)
            throw std::invalid_argument("Quadrature grid has " + std::to_string(grid.n_receive()) +
                                        " receive dimensions but the channel has " + std::to_string(H_dl.n_rows) +
                                        ".");
        if (!(noise_variance > 0.0))
            throw std::invalid_argument("Noise variance must be positive.");
        const PrecoderParam base = svd_parametrize(H_dl, budget);
        check_alphabet_guard(constellation, base.n_streams(), opts.mi);

        std::vector<PrecoderParam> starts{base};
        if (opts.multi_start)
        {
            PrecoderParam rot = base;
            rot.W = embed_rotation(rot.active, 0x524f54ULL);
            starts.push_back(rot);
            PrecoderParam nm = none_matched_start(H_dl, base, budget, 1e-8);
            if (nm.n_streams() == base.n_streams())
                starts.push_back(nm);
        }

        OptimizeResult best;
        for (unsigned i = 0; i < starts.size(); ++i)
        {
            OptimizeResult r = optimize_from(starts[i], noise_variance, constellation, grid.points_per_axis(), opts);
            const double b = r.bits;
            if (i == 0 || b > best.bits)
            {
                auto hist = std::move(best.start_bits);
                best = std::move(r);
                best.start_bits = std::move(hist);
                best.start = i;
            }
            best.start_bits.push_back(b);
        }
        return best;
    }

    arma::uword PgpPlan::n_fictitious() const
    {
        arma::uword n = 0;
        for (const auto &g : subgroups)
            n += g.n_fictitious;
        return n;
    }

    PgpPlan pgp_partition(const PrecoderParam &param, arma::uword n_p, double noise_variance, double rel_tol)
    {
        if (n_p < 1)
            throw std::invalid_argument("PGP subgroup size must be at least 1.");
        const arma::uword ns = param.s.n_elem;
        if (ns == 0 || !(param.s.max() > 0.0))
            throw std::invalid_argument("PGP needs a channel with nonzero rank.");

        std::vector<arma::uword> order(ns);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](arma::uword a, arma::uword b) { return param.s[a] > param.s[b]; });
        const double smax = param.s[order.front()];
        const std::vector<arma::uword> &real = order;

        PgpPlan plan;
        plan.n_p = n_p;
        plan.rank = arma::uword(arma::accu(param.s > rel_tol * smax));
        const double budget = param.power();
        for (std::size_t b = 0; b < real.size(); b += n_p)
        {
            PgpSubgroup g;
            g.streams.assign(real.begin() + b, real.begin() + std::min<std::size_t>(real.size(), b + n_p));
            g.n_fictitious = n_p - g.streams.size();
            arma::cx_vec diag(n_p, arma::fill::zeros);
            for (std::size_t i = 0; i < g.streams.size(); ++i)
                diag[i] = param.s[g.streams[i]];
            g.channel = {arma::diagmat(diag), noise_variance};
            g.budget = budget * double(g.streams.size()) / double(real.size());
            plan.subgroups.push_back(std::move(g));
        }
        return plan;
    }

    PgpResult optimize_pgp(const arma::cx_mat &H_dl, double noise_variance, const Constellation &constellation,
                           const QuadratureGrid &grid, double budget, arma::uword n_p, const OptimizerOptions &opts)
    {
        if (grid.n_receive() != H_dl.n_rows)
            throw std::invalid_argument("Quadrature grid has " + std::to_string(grid.n_receive()) +
                                        " receive dimensions but the channel has " + std::to_string(H_dl.n_rows) +
                                        ".");
        const PrecoderParam base = svd_parametrize(H_dl, budget);
        PgpResult out;
        out.plan = pgp_partition(base, n_p, noise_variance);
        out.precoder.zeros(H_dl.n_cols, base.n_streams());

        for (const auto &g : out.plan.subgroups)
        {
            const arma::uword k = g.streams.size();
            PrecoderParam sub;
            sub.V.eye(n_p, n_p);
            sub.s = arma::real(g.channel.matrix.diag());
            // Uniform over the subgroup's nonzero gains; zero-gain streams are reached through W
            sub.d.zeros(n_p);
            const arma::uword nz = arma::uword(arma::accu(sub.s > 1e-8 * base.s.max()));
            if (nz > 0)
                sub.d.head(nz).fill(std::sqrt(g.budget / double(nz)));
            else
                sub.d.head(k).fill(std::sqrt(g.budget / double(k)));
            sub.W.eye(n_p, n_p);
            sub.active.assign(n_p, 0);
            std::fill(sub.active.begin(), sub.active.begin() + k, 1);

            std::vector<PrecoderParam> starts{sub};
            if (opts.multi_start && k >= 2)
            {
                PrecoderParam rot = sub;
                rot.W = embed_rotation(rot.active, 0x524f54ULL);
                starts.push_back(rot);
            }
            OptimizeResult best;
            for (unsigned i = 0; i < starts.size(); ++i)
            {
                OptimizeResult r = optimize_from(starts[i], noise_variance, constellation, grid.points_per_axis(), opts);
                const double b = r.bits;
                if (i == 0 || b > best.bits)
                {
                    auto hist = std::move(best.start_bits);
                    best = std::move(r);
                    best.start_bits = std::move(hist);
                    best.start = i;
                }
                best.start_bits.push_back(b);
            }

            out.subgroups.push_back(std::move(best));
        }

        const arma::uword L = grid.points_per_axis();
        const std::size_t G = out.subgroups.size();
        if (opts.pgp_power_split && G > 1)
        {
            const double floor = 1e-6 * budget;
            std::vector<double> B(G);
            double total = 0.0;
            for (std::size_t j = 0; j < G; ++j)
            {
                B[j] = out.subgroups[j].param.power();
                total += out.subgroups[j].bits;
            }
            for (unsigned it = 0; it < opts.max_split_iterations; ++it)
            {
                arma::vec lambda(G);
                for (std::size_t j = 0; j < G; ++j)
                    lambda[j] = budget_derivative(out.subgroups[j].param, noise_variance, constellation, L, opts.mi);
                arma::vec dir = lambda - arma::mean(lambda);
                const double dn = arma::norm(dir);
                if (!(dn > 1e-12 * std::max(1.0, arma::norm(lambda))))
                    break;
                dir *= 0.5 * budget / dn;

                bool accepted = false;
                std::vector<double> Bn(G);
                double t = opts.initial_step;
                for (unsigned h = 0; h <= opts.max_halvings && !accepted; ++h, t *= opts.shrink)
                {
                    double sum = 0.0;
                    for (std::size_t j = 0; j < G; ++j)
                        sum += (Bn[j] = std::max(floor, B[j] + t * dir[j]));
                    double trial = 0.0, slope = 0.0;
                    for (std::size_t j = 0; j < G; ++j)
                    {
                        Bn[j] *= budget / sum;
                        slope += lambda[j] * (Bn[j] - B[j]);
                        trial += param_mutual_information(rescaled(out.subgroups[j].param, Bn[j]), noise_variance,
                                                          constellation, L, opts.mi);
                    }
                    if (slope > 0.0 && trial >= total + opts.slope * slope)
                        accepted = true;
                }
                if (!accepted)
                    break;

                double next = 0.0;
                for (std::size_t j = 0; j < G; ++j)
                {
                    OptimizeResult r = optimize_from(rescaled(out.subgroups[j].param, Bn[j]), noise_variance,
                                                     constellation, L, opts);
                    r.start = out.subgroups[j].start;
                    r.start_bits = out.subgroups[j].start_bits;
                    out.subgroups[j] = std::move(r);
                    out.plan.subgroups[j].budget = Bn[j];
                    next += out.subgroups[j].bits;
                }
                B = Bn;
                ++out.split_iterations;
                const double prev = total;
                total = next;
                if (total - prev <= opts.tolerance * std::max(prev, 1e-12))
                    break;
            }
        }

        arma::uword col = 0;
        for (std::size_t j = 0; j < G; ++j)
        {
            const auto &g = out.plan.subgroups[j];
            const auto &best = out.subgroups[j];
            const arma::uword k = g.streams.size();
            const arma::cx_mat Pk = best.param.precoder().submat(0, 0, k - 1, k - 1);
            arma::cx_mat Vk(H_dl.n_cols, k);
            for (arma::uword i = 0; i < k; ++i)
                Vk.col(i) = base.V.col(g.streams[i]);
            out.precoder.cols(col, col + k - 1) = Vk * Pk;
            col += k;
            out.bits += best.bits;
            out.iterations = std::max(out.iterations, best.iterations);
        }
        return out;
    }

    arma::cx_mat baseline_no_precoding(const arma::cx_mat &H_dl, double budget)
    {
        check_budget(budget);
        const arma::uword ns = std::min(H_dl.n_rows, H_dl.n_cols);
        if (ns == 0)
            throw std::invalid_argument("Downlink channel is empty.");
        arma::cx_mat P(H_dl.n_cols, ns, arma::fill::eye);
        return P * std::sqrt(budget / double(ns));
    }

    arma::cx_mat baseline_plain_beamforming(const arma::cx_mat &H_dl, double budget)
    {
        check_budget(budget);
        PrecoderParam p = svd_parametrize(H_dl, budget, 0.0);
        p.d.fill(std::sqrt(budget / double(p.n_streams())));
        return p.precoder();
    }

    arma::cx_mat baseline_svapb(const arma::cx_mat &H_dl, double budget, double rel_tol)
    {
        return svd_parametrize(H_dl, budget, rel_tol).precoder();
    }
}
