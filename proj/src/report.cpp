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

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace beamspace
{
    namespace
    {
        std::string fmt(const char *f, double x)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, f, x);
            return buf;
        }

        void write_file(const std::filesystem::path &p, const std::string &text)
        {
            std::ofstream os(p, std::ios::binary);
            if (!os)
                throw std::runtime_error("Cannot write " + p.string());
            os << text;
        }

        const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    }

    std::string results_csv(const RunReport &report)
    {
        std::ostringstream os;
        os << "group,user,method,snr_s_db,snr_b_db,mi_bits,iters,rho,support_size\n";
        for (const auto &c : report.cells)
        {
            os << c.group << ',' << c.user << ',' << method_name(c.method) << ',' << fmt("%.4f", c.snr_s_db) << ','
               << fmt("%.4f", c.snr_b_db) << ',' << (c.ok ? fmt("%.6f", c.mi_bits) : std::string("NA")) << ','
               << c.iterations << ',' << fmt("%.6f", c.rho) << ',' << c.support_size << '\n';
        }
        return os.str();
    }

    std::string traces_csv(const RunReport &report)
    {
        std::ostringstream os;
        os << "group,user,method,snr_s_db,block,iteration,objective,step_d,step_w\n";
        for (const auto &c : report.cells)
            for (std::size_t b = 0; b < c.trace.size(); ++b)
                for (const auto &t : c.trace[b])
                    os << c.group << ',' << c.user << ',' << method_name(c.method) << ',' << fmt("%.4f", c.snr_s_db)
                       << ',' << b + 1 << ',' << t.iteration << ',' << fmt("%.8f", t.objective) << ','
                       << fmt("%.6g", t.step_d) << ',' << fmt("%.6g", t.step_w) << '\n';
        return os.str();
    }

    std::string supports_json(const RunReport &report)
    {
        nlohmann::json arr = nlohmann::json::array();
        const auto &p = report.prepared;
        for (std::size_t g = 0; g < p.supports.size(); ++g)
        {
            arr.push_back({{"group", report.config.groups[g].scenario.id},
                           {"detected", p.detected[g].one_based()},
                           {"support", p.supports[g].one_based()},
                           {"rho", std::round(p.rho[g] * 1e6) / 1e6}});
        }
        return arr.dump(2) + "\n";
    }

    std::string report_json(const RunReport &report)
    {
        nlohmann::json j;
        j["name"] = report.config.name;
        j["seed"] = report.config.seed;
        j["constellation"] = report.config.constellation;
        j["cells"] = report.cells.size();
        j["wall_seconds"] = report.wall_seconds;
        nlohmann::json failed = nlohmann::json::array(), mc = nlohmann::json::array();
        for (const auto &c : report.cells)
        {
            nlohmann::json id = {{"group", c.group}, {"user", c.user}, {"method", method_name(c.method)}, {"snr_s_db", c.snr_s_db}};
            if (!c.ok)
            {
                id["reason"] = c.reason;
                failed.push_back(id);
            }
            else if (c.monte_carlo)
            {
                id["mi_bits"] = c.mi_bits;
                id["standard_error"] = c.standard_error;
                mc.push_back(id);
            }
        }
        j["failed"] = failed;
        j["monte_carlo"] = mc;
        if (report.prepared.assignment)
            j["subcarriers_used"] = report.prepared.assignment->n_used();
        return j.dump(2) + "\n";
    }

    std::string plot_svg(const RunReport &report, int group, arma::uword user)
    {
        std::map<Method, std::vector<std::pair<double, double>>> series;
        std::vector<Method> order;
        for (const auto &c : report.cells)
        {
            if (c.group != group || c.user != user || !c.ok)
                continue;
            if (!series.count(c.method))
                order.push_back(c.method);
            series[c.method].emplace_back(c.snr_b_db, c.mi_bits);
        }

        const double W = 640, H = 420, ml = 60, mr = 130, mt = 40, mb = 50;
        double x0 = 0, x1 = 1, y1 = 1;
        bool first = true;
        for (const auto &[m, pts] : series)
            for (const auto &[x, y] : pts)
            {
                if (first)
                    x0 = x1 = x, first = false;
                x0 = std::min(x0, x), x1 = std::max(x1, x), y1 = std::max(y1, y);
            }
        if (x1 <= x0)
            x1 = x0 + 1;
        y1 = std::ceil(y1);
        auto px = [&](double x)
        { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
        auto py = [&](double y)
        { return H - mb - y / y1 * (H - mt - mb); };

        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        std::string title = report.config.name + " - group " + std::to_string(group);
        if (user > 0)
            title += " user " + std::to_string(user);
        os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
        os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
        os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 5; ++i)
        {
            const double x = x0 + (x1 - x0) * i / 5.0, y = y1 * i / 5.0;
            os << "<text x=\"" << fmt("%.1f", px(x)) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << fmt("%.1f", x) << "</text>\n";
            os << "<text x=\"" << ml - 6 << "\" y=\"" << fmt("%.1f", py(y) + 4) << "\" text-anchor=\"end\">" << fmt("%.1f", y) << "</text>\n";
            os << "<line x1=\"" << ml << "\" y1=\"" << fmt("%.1f", py(y)) << "\" x2=\"" << W - mr << "\" y2=\"" << fmt("%.1f", py(y)) << "\" stroke=\"#ddd\"/>\n";
        }
        os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">SNR_b (dB)</text>\n";
        os << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (mt + H - mb) / 2 << ")\">MI (bits/channel use)</text>\n";

        for (std::size_t i = 0; i < order.size(); ++i)
        {
            const Method m = order[i];
            const char *col = kColors[int(m) % 5];
            auto pts = series[m];
            std::sort(pts.begin(), pts.end());
            os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
            for (const auto &[x, y] : pts)
                os << fmt("%.1f", px(x)) << ',' << fmt("%.1f", py(y)) << ' ';
            os << "\"/>\n";
            for (const auto &[x, y] : pts)
                os << "<circle cx=\"" << fmt("%.1f", px(x)) << "\" cy=\"" << fmt("%.1f", py(y)) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
            const double ly = mt + 10 + 18 * double(i);
            os << "<line x1=\"" << W - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - mr + 30 << "\" y2=\"" << ly << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
            os << "<text x=\"" << W - mr + 36 << "\" y=\"" << ly + 4 << "\">" << method_name(m) << "</text>\n";
        }
        os << "</svg>\n";
        return os.str();
    }

    void write_artifacts(const RunReport &report, const std::string &dir, bool plots)
    {
        namespace fs = std::filesystem;
        const fs::path root(dir);
        fs::create_directories(root);
        write_file(root / "results.csv", results_csv(report));
        write_file(root / "traces.csv", traces_csv(report));
        write_file(root / "supports.json", supports_json(report));
        write_file(root / "report.json", report_json(report));
        if (report.prepared.assignment)
            write_file(root / "assignment.json", report.prepared.assignment->to_json() + "\n");
        if (!plots)
            return;
        for (const auto &r : report.prepared.receivers)
        {
            std::string name = "plot_g" + std::to_string(r.group);
            if (r.user > 0)
                name += "_u" + std::to_string(r.user);
            write_file(root / (name + ".svg"), plot_svg(report, r.group, r.user));
        }
    }
}
