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

#include "beamspace/scenario.hpp"

#include "rng.hpp"

#include <yaml-cpp/yaml.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace beamspace
{
    std::string method_name(Method m)
    {
        switch (m)
        {
        case Method::Optimized:
            return "optimized";
        case Method::Pgp:
            return "pgp";
        case Method::Plain:
            return "plain";
        case Method::Svapb:
            return "svapb";
        case Method::None:
            return "none";
        }
        return "?";
    }

    std::string Diagnostic::str() const
    {
        std::ostringstream os;
        os << source;
        if (line > 0)
            os << ":" << line << ":" << column;
        os << ": " << (field.empty() ? std::string("<root>") : field) << ": " << message;
        return os.str();
    }

    namespace
    {
        std::string join(const std::vector<Diagnostic> &d)
        {
            std::string s;
            for (const auto &x : d)
                s += (s.empty() ? "" : "\n") + x.str();
            return s;
        }
    }

    ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
        : std::runtime_error(join(diagnostics)), diagnostics_(std::move(diagnostics))
    {
    }

    const std::vector<Method> &ScenarioRun::methods_for(std::size_t group) const
    {
        const auto &m = groups.at(group).methods;
        return m.empty() ? methods : m;
    }

    double snr_b_db(double snr_s_db, unsigned constellation_order)
    {
        return snr_s_db - 10.0 * std::log10(std::log2(double(constellation_order)));
    }

    // ---------------------------------------------------------------- parsing

    namespace
    {
        class Reader
        {
        public:
            explicit Reader(std::string source) : source_(std::move(source)) {}

            std::vector<Diagnostic> diags;

            void error(const YAML::Node &node, const std::string &field, const std::string &msg)
            {
                Diagnostic d;
                d.source = source_;
                if (node.IsDefined() && node.Mark().line >= 0)
                {
                    d.line = node.Mark().line + 1;
                    d.column = node.Mark().column + 1;
                }
                d.field = field;
                d.message = msg;
                diags.push_back(std::move(d));
            }

            void check_keys(const YAML::Node &map, const std::string &path, const std::set<std::string> &allowed)
            {
                for (auto it = map.begin(); it != map.end(); ++it)
                {
                    const std::string key = it->first.as<std::string>();
                    if (!allowed.count(key))
                        error(it->first, sub(path, key), "unknown field");
                }
            }

            static std::string sub(const std::string &path, const std::string &key)
            {
                return path.empty() ? key : path + "." + key;
            }

            template <typename T>
            std::optional<T> scalar(const YAML::Node &parent, const std::string &key, const std::string &path,
                                    bool required, const char *type_name)
            {
                const YAML::Node n = parent[key];
                if (!n)
                {
                    if (required)
                        error(parent, sub(path, key), "missing required field");
                    return std::nullopt;
                }
                if (!n.IsScalar())
                {
                    error(n, sub(path, key), std::string("expected ") + type_name);
                    return std::nullopt;
                }
                try
                {
                    return n.as<T>();
                }
                catch (const YAML::Exception &)
                {
                    error(n, sub(path, key), std::string("expected ") + type_name + ", got '" + n.Scalar() + "'");
                    return std::nullopt;
                }
            }

            std::optional<double> number(const YAML::Node &p, const std::string &k, const std::string &path, bool req)
            {
                auto v = scalar<double>(p, k, path, req, "a number");
                if (v && !std::isfinite(*v))
                {
                    error(p[k], sub(path, k), "must be finite");
                    return std::nullopt;
                }
                return v;
            }

            std::optional<long long> integer(const YAML::Node &p, const std::string &k, const std::string &path, bool req,
                                             long long lo, long long hi)
            {
                auto v = scalar<long long>(p, k, path, req, "an integer");
                if (v && (*v < lo || *v > hi))
                {
                    error(p[k], sub(path, k), "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " +
                                                  std::to_string(*v));
                    return std::nullopt;
                }
                return v;
            }

            std::optional<bool> boolean(const YAML::Node &p, const std::string &k, const std::string &path)
            {
                return scalar<bool>(p, k, path, false, "true or false");
            }

            std::vector<Method> methods(const YAML::Node &n, const std::string &field)
            {
                std::vector<Method> out;
                if (!n.IsSequence() || n.size() == 0)
                {
                    error(n, field, "expected a non-empty list of methods");
                    return out;
                }
                static const std::map<std::string, Method> names{{"optimized", Method::Optimized},
                                                                 {"pgp", Method::Pgp},
                                                                 {"plain", Method::Plain},
                                                                 {"svapb", Method::Svapb},
                                                                 {"none", Method::None}};
                std::set<Method> seen;
                for (std::size_t i = 0; i < n.size(); ++i)
                {
                    const std::string f = field + "[" + std::to_string(i) + "]";
                    if (!n[i].IsScalar() || !names.count(n[i].Scalar()))
                    {
                        error(n[i], f, "unknown method; expected one of optimized, pgp, plain, svapb, none");
                        continue;
                    }
                    const Method m = names.at(n[i].Scalar());
                    if (!seen.insert(m).second)
                        error(n[i], f, "duplicate method");
                    else
                        out.push_back(m);
                }
                return out;
            }

        private:
            std::string source_;
        };

        void parse_geometry(Reader &r, const YAML::Node &root, ScenarioRun &run)
        {
            const YAML::Node g = root["geometry"];
            if (!g)
            {
                r.error(root, "geometry", "missing required field");
                return;
            }
            if (!g.IsMap())
            {
                r.error(g, "geometry", "expected a map");
                return;
            }
            r.check_keys(g, "geometry", {"array", "elements", "spacing"});
            const auto array = r.scalar<std::string>(g, "array", "geometry", true, "a string");
            const auto spacing = r.number(g, "spacing", "geometry", false);
            if (spacing && !(*spacing > 0.0))
                r.error(g["spacing"], "geometry.spacing", "must be positive");
            const double D = spacing.value_or(0.5);

            const YAML::Node e = g["elements"];
            if (!e)
            {
                r.error(g, "geometry.elements", "missing required field");
                return;
            }
            if (!array)
                return;

            static const std::map<std::string, ArrayKind> kinds{
                {"ula", ArrayKind::ULA_Z}, {"upa_zx", ArrayKind::UPA_ZX}, {"upa_xy", ArrayKind::UPA_XY}};
            if (!kinds.count(*array))
            {
                r.error(g["array"], "geometry.array", "unknown array '" + *array + "'; expected ula, upa_zx or upa_xy");
                return;
            }
            const ArrayKind kind = kinds.at(*array);
            auto count = [&](const YAML::Node &n, const std::string &f) -> arma::uword
            {
                try
                {
                    const long long v = n.as<long long>();
                    if (v >= 1 && v <= 4096)
                        return arma::uword(v);
                }
                catch (const YAML::Exception &)
                {
                }
                r.error(n, f, "expected an element count in [1, 4096]");
                return 0;
            };
            if (kind == ArrayKind::ULA_Z)
            {
                if (!e.IsScalar())
                {
                    r.error(e, "geometry.elements", "a ULA takes a single element count");
                    return;
                }
                const arma::uword n = count(e, "geometry.elements");
                if (n > 0 && D > 0.0)
                    run.geometry = ArrayGeometry::ula(n, D);
                return;
            }
            if (!e.IsSequence() || e.size() != 2)
            {
                r.error(e, "geometry.elements", "a UPA takes [outer, inner] element counts");
                return;
            }
            const arma::uword no = count(e[0], "geometry.elements[0]");
            const arma::uword ni = count(e[1], "geometry.elements[1]");
            if (no > 0 && ni > 0 && D > 0.0)
                run.geometry = ArrayGeometry::upa(kind, no, ni, D);
        }

        void parse_groups(Reader &r, const YAML::Node &root, ScenarioRun &run)
        {
            const YAML::Node gs = root["groups"];
            if (!gs)
            {
                r.error(root, "groups", "missing required field");
                return;
            }
            if (!gs.IsSequence() || gs.size() == 0)
            {
                r.error(gs, "groups", "expected a non-empty list of groups");
                return;
            }
            std::set<long long> ids;
            for (std::size_t i = 0; i < gs.size(); ++i)
            {
                const std::string path = "groups[" + std::to_string(i) + "]";
                const YAML::Node g = gs[i];
                if (!g.IsMap())
                {
                    r.error(g, path, "expected a map");
                    continue;
                }
                r.check_keys(g, path,
                             {"id", "theta_deg", "theta_spread_deg", "phi_deg", "phi_spread_deg", "paths", "users",
                              "methods"});
                GroupConfig gc;
                const auto id = r.integer(g, "id", path, true, 1, 1000000);
                if (id)
                {
                    if (!ids.insert(*id).second)
                        r.error(g["id"], path + ".id", "duplicate group id " + std::to_string(*id));
                    gc.scenario.id = int(*id);
                }
                const auto th = r.number(g, "theta_deg", path, true);
                if (th && (*th < 0.0 || *th > 180.0))
                    r.error(g["theta_deg"], path + ".theta_deg", "must be in [0, 180]");
                const auto ts = r.number(g, "theta_spread_deg", path, true);
                if (ts && (*ts < 0.0 || *ts > 90.0))
                    r.error(g["theta_spread_deg"], path + ".theta_spread_deg", "must be in [0, 90]");
                const auto ph = r.number(g, "phi_deg", path, false);
                const auto ps = r.number(g, "phi_spread_deg", path, false);
                if (ps && (*ps < 0.0 || *ps > 180.0))
                    r.error(g["phi_spread_deg"], path + ".phi_spread_deg", "must be in [0, 180]");
                const auto paths = r.integer(g, "paths", path, true, 1, 1000);

                gc.scenario.theta = deg_to_rad(th.value_or(0.0));
                gc.scenario.theta_spread = deg_to_rad(ts.value_or(0.0));
                gc.scenario.phi = deg_to_rad(ph.value_or(0.0));
                gc.scenario.phi_spread = deg_to_rad(ps.value_or(0.0));
                gc.scenario.n_paths = arma::uword(paths.value_or(1));

                const YAML::Node u = g["users"];
                if (!u)
                    r.error(g, path + ".users", "missing required field");
                else if (!u.IsSequence() || u.size() == 0)
                    r.error(u, path + ".users", "expected a non-empty list of antenna counts");
                else
                {
                    gc.scenario.user_antennas.clear();
                    for (std::size_t k = 0; k < u.size(); ++k)
                    {
                        long long v = 0;
                        try
                        {
                            v = u[k].as<long long>();
                        }
                        catch (const YAML::Exception &)
                        {
                            v = 0;
                        }
                        if (v < 1 || v > 64)
                            r.error(u[k], path + ".users[" + std::to_string(k) + "]",
                                    "expected an antenna count in [1, 64]");
                        else
                            gc.scenario.user_antennas.push_back(arma::uword(v));
                    }
                }
                if (g["methods"])
                    gc.methods = r.methods(g["methods"], path + ".methods");
                run.groups.push_back(std::move(gc));
            }
        }

        ScenarioRun parse_root(Reader &r, const YAML::Node &root)
        {
            ScenarioRun run;
            if (!root.IsMap())
            {
                r.error(root, "", "expected a map at the top level");
                return run;
            }
            r.check_keys(root, "",
                         {"name", "seed", "geometry", "threshold", "constellation", "snr_db", "methods", "pgp",
                          "quadrature_points", "mc_samples", "normalize", "shared_angles", "limits", "ofdm", "output",
                          "groups"});

            if (auto v = r.scalar<std::string>(root, "name", "", false, "a string"))
                run.name = *v;
            if (auto v = r.integer(root, "seed", "", true, 0, std::numeric_limits<long long>::max()))
                run.seed = std::uint64_t(*v);
            if (auto v = r.number(root, "threshold", "", false))
            {
                if (*v > 0.0)
                    run.threshold = *v;
                else
                    r.error(root["threshold"], "threshold", "must be positive");
            }
            if (auto v = r.integer(root, "constellation", "", true, 0, 1 << 20))
            {
                if (is_supported_qam_order(unsigned(*v)))
                    run.constellation = unsigned(*v);
                else
                    r.error(root["constellation"], "constellation",
                            "M = " + std::to_string(*v) + " is not supported; square QAM orders are 4, 16 and 64");
            }

            const YAML::Node snr = root["snr_db"];
            if (!snr)
                r.error(root, "snr_db", "missing required field");
            else if (!snr.IsSequence() || snr.size() == 0)
                r.error(snr, "snr_db", "expected a non-empty list of numbers");
            else
                for (std::size_t i = 0; i < snr.size(); ++i)
                {
                    try
                    {
                        const double x = snr[i].as<double>();
                        if (!std::isfinite(x) || std::abs(x) > 100.0)
                            throw YAML::Exception(snr[i].Mark(), "range");
                        run.snr_db.push_back(x);
                    }
                    catch (const YAML::Exception &)
                    {
                        r.error(snr[i], "snr_db[" + std::to_string(i) + "]", "expected a number in [-100, 100]");
                    }
                }

            if (!root["methods"])
                r.error(root, "methods", "missing required field");
            else
                run.methods = r.methods(root["methods"], "methods");

            if (const YAML::Node p = root["pgp"])
            {
                if (!p.IsMap())
                    r.error(p, "pgp", "expected a map");
                else
                {
                    r.check_keys(p, "pgp", {"n_p"});
                    if (auto v = r.integer(p, "n_p", "pgp", false, 1, 16))
                        run.n_p = arma::uword(*v);
                }
            }
            if (auto v = r.integer(root, "quadrature_points", "", false, 1, 10))
                run.quadrature_points = arma::uword(*v);
            if (auto v = r.integer(root, "mc_samples", "", false, 0, 100000000))
            {
                if (*v != 0 && *v < 10000)
                    r.error(root["mc_samples"], "mc_samples", "must be 0 (disabled) or at least 10000");
                else
                    run.mc_samples = std::size_t(*v);
            }
            if (auto v = r.boolean(root, "normalize", ""))
                run.normalize = *v;
            if (auto v = r.boolean(root, "shared_angles", ""))
                run.shared_angles = *v;
            if (const YAML::Node l = root["limits"])
            {
                if (!l.IsMap())
                    r.error(l, "limits", "expected a map");
                else
                {
                    r.check_keys(l, "limits", {"allow_large_alphabet", "allow_large_quadrature"});
                    if (auto v = r.boolean(l, "allow_large_alphabet", "limits"))
                        run.limits.allow_large_alphabet = *v;
                    if (auto v = r.boolean(l, "allow_large_quadrature", "limits"))
                        run.limits.allow_large_quadrature = *v;
                }
            }
            if (const YAML::Node o = root["ofdm"])
            {
                if (!o.IsMap())
                    r.error(o, "ofdm", "expected a map");
                else
                {
                    r.check_keys(o, "ofdm", {"subcarriers", "taps", "cfsdm"});
                    run.ofdm.enabled = true;
                    if (auto v = r.integer(o, "subcarriers", "ofdm", true, 1, 65536))
                        run.ofdm.n_subcarriers = arma::uword(*v);
                    if (auto v = r.integer(o, "taps", "ofdm", true, 1, 1024))
                        run.ofdm.n_taps = arma::uword(*v);
                    if (auto v = r.boolean(o, "cfsdm", "ofdm"))
                        run.ofdm.cfsdm = *v;
                    if (run.ofdm.n_subcarriers < run.ofdm.n_taps)
                        r.error(o, "ofdm.subcarriers", "must be at least ofdm.taps");
                }
            }
            if (auto v = r.scalar<std::string>(root, "output", "", false, "a string"))
                run.output = *v;

            parse_geometry(r, root, run);
            parse_groups(r, root, run);
            return run;
        }

        ScenarioRun parse_node(const std::function<YAML::Node()> &load, const std::string &source,
                               std::vector<Diagnostic> &diags)
        {
            Reader r(source);
            ScenarioRun run;
            try
            {
                const YAML::Node root = load();
                run = parse_root(r, root);
            }
            catch (const YAML::BadFile &)
            {
                r.diags.push_back({source, 0, 0, "", "cannot read file"});
            }
            catch (const YAML::Exception &e)
            {
                r.diags.push_back({source, e.mark.line + 1, e.mark.column + 1, "", "YAML syntax error: " + e.msg});
            }
            diags = std::move(r.diags);
            return run;
        }
    }

    ScenarioRun parse_scenario(const std::string &text, const std::string &source)
    {
        std::vector<Diagnostic> d;
        ScenarioRun run = parse_node([&]
                                     { return YAML::Load(text); },
                                     source, d);
        if (!d.empty())
            throw ConfigError(std::move(d));
        return run;
    }

    ScenarioRun load_scenario(const std::string &path)
    {
        std::vector<Diagnostic> d;
        ScenarioRun run = parse_node([&]
                                     { return YAML::LoadFile(path); },
                                     path, d);
        if (!d.empty())
            throw ConfigError(std::move(d));
        return run;
    }

    std::vector<Diagnostic> validate_config(const std::string &path)
    {
        std::vector<Diagnostic> d;
        parse_node([&]
                   { return YAML::LoadFile(path); },
                   path, d);
        return d;
    }

    // ---------------------------------------------------------------- preparation

    namespace
    {
        arma::cx_mat normalized(const arma::cx_mat &H, bool on)
        {
            if (!on || H.n_elem == 0)
                return H;
            const double f = arma::norm(H, "fro");
            if (!(f > 0.0))
                return H;
            return H * (std::sqrt(double(H.n_rows * H.n_cols)) / f);
        }
    }

    PreparedScenario prepare_scenario(const ScenarioRun &run)
    {
        PreparedScenario out;
        const DftBasis basis = DftBasis::for_geometry(run.geometry);
        SynthOptions so;
        so.shared_angles = run.shared_angles;
        const std::size_t G = run.groups.size();

        std::vector<arma::cx_mat> uplink(G);
        std::vector<TapChannel> taps(G);
        for (std::size_t g = 0; g < G; ++g)
        {
            const auto &sc = run.groups[g].scenario;
            if (run.ofdm.enabled)
            {
                taps[g] = synth_fs_channel(sc, run.geometry, run.seed, run.ofdm.n_taps, so);
                out.detected.push_back(detect_support_fs(taps[g], basis, run.threshold, sc.id));
            }
            else
            {
                uplink[g] = synth_group_channel(sc, run.geometry, run.seed, so);
                out.detected.push_back(detect_support(project_vcm(uplink[g], basis), run.threshold, sc.id));
            }
        }

        const bool cfsdm = run.ofdm.enabled && run.ofdm.cfsdm;
        out.supports = cfsdm ? out.detected : resolve_overlap_release(out.detected);

        for (std::size_t g = 0; g < G; ++g)
        {
            double rho = 0.0;
            if (run.ofdm.enabled)
            {
                double on = 0.0, total = 0.0;
                for (const auto &t : taps[g])
                {
                    on += power_fraction_on(t, basis, out.supports[g].indices) * arma::accu(arma::square(arma::abs(t)));
                    total += arma::accu(arma::square(arma::abs(t)));
                }
                rho = total > 0.0 ? on / total : 0.0;
            }
            else
                rho = power_fraction_on(uplink[g], basis, out.supports[g].indices);
            out.supports[g].captured = rho;
            out.rho.push_back(rho);
        }

        if (cfsdm)
        {
            std::vector<CfsdmGroup> cg;
            for (std::size_t g = 0; g < G; ++g)
                cg.push_back({run.groups[g].scenario.id, out.supports[g].indices,
                              arma::uword(run.groups[g].scenario.user_antennas.size())});
            out.assignment = cfsdm_assign(cg, run.ofdm.n_subcarriers);
        }

        for (std::size_t g = 0; g < G; ++g)
        {
            const auto &sc = run.groups[g].scenario;
            const SupportSet &S = out.supports[g];
            if (cfsdm)
            {
                for (arma::uword k = 0; k < sc.user_antennas.size(); ++k)
                {
                    Receiver r{g, sc.id, k + 1, out.assignment->subcarrier(sc.id, k), {}, S};
                    if (!S.empty())
                    {
                        const auto ch = subcarrier_channel(taps[g], basis, S, r.subcarrier, run.ofdm.n_subcarriers);
                        r.downlink = normalized(user_downlink(ch.downlink, sc, k), run.normalize);
                    }
                    out.receivers.push_back(std::move(r));
                }
                continue;
            }
            Receiver r{g, sc.id, 0, 0, {}, S};
            if (!S.empty())
            {
                if (run.ofdm.enabled)
                    r.downlink = subcarrier_channel(taps[g], basis, S, 0, run.ofdm.n_subcarriers).downlink;
                else
                    r.downlink = effective_virtual_channel(uplink[g], basis, S).matrix.t();
                r.downlink = normalized(r.downlink, run.normalize);
            }
            out.receivers.push_back(std::move(r));
        }
        return out;
    }

    namespace
    {
        double alphabet(unsigned M, arma::uword n) { return std::pow(double(M), double(n)); }

        double kernel_cost(unsigned M, arma::uword n, arma::uword L)
        {
            return alphabet(M, n) * alphabet(M, n) * std::pow(double(L), 2.0 * double(n));
        }

        std::string who(const Receiver &r, Method m)
        {
            std::string s = "group " + std::to_string(r.group);
            if (r.user > 0)
                s += " user " + std::to_string(r.user);
            return s + ", method " + method_name(m) + ": ";
        }
    }

    void check_guards(const ScenarioRun &run, const PreparedScenario &prepared)
    {
        const unsigned M = run.constellation;
        const arma::uword L = run.quadrature_points;
        for (const auto &r : prepared.receivers)
        {
            if (r.downlink.n_elem == 0)
                continue;
            const arma::uword ns = std::min(r.downlink.n_rows, r.downlink.n_cols);
            for (Method m : run.methods_for(r.group_index))
            {
                const arma::uword n = m == Method::Pgp ? std::min(run.n_p, ns) : ns;
                if (alphabet(M, n) > kMaxAlphabet && !run.limits.allow_large_alphabet)
                    throw GuardViolation(who(r, m) + "alphabet M^N_t = " + std::to_string(M) + "^" + std::to_string(n) +
                                         " exceeds the limit 2^20 (limits.allow_large_alphabet overrides)");
                const bool mc_ok = run.mc_samples > 0 && (m == Method::None || m == Method::Plain || m == Method::Svapb);
                if (kernel_cost(M, n, L) > kMaxKernelCost && !run.limits.allow_large_quadrature && !mc_ok)
                    throw GuardViolation(who(r, m) + "quadrature needs M^(2 N_t) L^(2 N_t) = " +
                                         std::to_string(kernel_cost(M, n, L)) +
                                         " kernel evaluations, above the limit 2^31 (set mc_samples for baselines or "
                                         "limits.allow_large_quadrature)");
            }
        }
    }

    // ---------------------------------------------------------------- execution

    namespace
    {
        struct CellJob
        {
            std::size_t receiver;
            Method method;
            double snr;
        };

        CellResult run_cell(const ScenarioRun &run, const PreparedScenario &prep, const CellJob &job,
                            const Constellation &cons)
        {
            const Receiver &rx = prep.receivers[job.receiver];
            CellResult c;
            c.group = rx.group;
            c.user = rx.user;
            c.method = job.method;
            c.snr_s_db = job.snr;
            c.snr_b_db = snr_b_db(job.snr, run.constellation);
            c.rho = prep.rho[rx.group_index];
            c.support_size = rx.support.size();

            if (rx.downlink.n_elem == 0)
            {
                c.ok = false;
                c.reason = "empty support after overlap release";
                return c;
            }
            try
            {
                const arma::cx_mat &H = rx.downlink;
                const double nv = std::pow(10.0, -job.snr / 10.0);
                const double budget = double(H.n_rows);
                const QuadratureGrid grid(H.n_rows, run.quadrature_points);
                OptimizerOptions opts;
                opts.mi = run.limits;
                opts.mi.n_threads = 1;

                switch (job.method)
                {
                case Method::Optimized:
                {
                    auto r = optimize_precoder(H, nv, cons, grid, budget, opts);
                    c.mi_bits = r.bits;
                    c.iterations = r.iterations;
                    c.trace.push_back(r.trace);
                    break;
                }
                case Method::Pgp:
                {
                    auto r = optimize_pgp(H, nv, cons, grid, budget, run.n_p, opts);
                    c.mi_bits = r.bits;
                    c.iterations = r.iterations;
                    c.n_fictitious = r.plan.n_fictitious();
                    for (const auto &s : r.subgroups)
                        c.trace.push_back(s.trace);
                    break;
                }
                default:
                {
                    arma::cx_mat P;
                    if (job.method == Method::None)
                        P = baseline_no_precoding(H, budget);
                    else if (job.method == Method::Plain)
                        P = baseline_plain_beamforming(H, budget);
                    else
                        P = baseline_svapb(H, budget);
                    const EffectiveChannel ch{H * P, nv};
                    if (run.mc_samples > 0 && kernel_cost(run.constellation, P.n_cols, run.quadrature_points) > kMaxKernelCost &&
                        !run.limits.allow_large_quadrature)
                    {
                        const std::uint64_t seed = detail::derive_seed(
                            run.seed, {0x43454c4c, rx.group, std::int64_t(rx.user), std::int64_t(job.method),
                                       std::int64_t(std::llround(job.snr * 1000.0))});
                        const auto mc = mutual_information_mc(ch, cons, run.mc_samples, seed, opts.mi);
                        c.mi_bits = mc.bits;
                        c.monte_carlo = true;
                        c.standard_error = mc.standard_error;
                    }
                    else
                        c.mi_bits = mutual_information_gh(ch, cons, grid, opts.mi);
                    break;
                }
                }
            }
            catch (const std::exception &e)
            {
                c.ok = false;
                c.reason = e.what();
            }
            return c;
        }
    }

    RunReport run_scenario(const ScenarioRun &run, unsigned n_threads)
    {
        const auto t0 = std::chrono::steady_clock::now();
        RunReport rep;
        rep.config = run;
        rep.prepared = prepare_scenario(run);
        check_guards(run, rep.prepared);

        const Constellation cons = Constellation::qam(run.constellation);
        std::vector<CellJob> jobs;
        for (std::size_t r = 0; r < rep.prepared.receivers.size(); ++r)
            for (Method m : run.methods_for(rep.prepared.receivers[r].group_index))
                for (double snr : run.snr_db)
                    jobs.push_back({r, m, snr});

        rep.cells.resize(jobs.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&]
        {
            for (std::size_t i = next++; i < jobs.size(); i = next++)
                rep.cells[i] = run_cell(run, rep.prepared, jobs[i], cons);
        };
        const unsigned nt = std::max(1u, std::min<unsigned>(n_threads, unsigned(jobs.size())));
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < nt; ++t)
            pool.emplace_back(worker);
        worker();
        for (auto &t : pool)
            t.join();

        rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
    }
}
