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

#include "beamspace/constellation.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace beamspace
{
    bool is_supported_qam_order(unsigned order)
    {
        return order == 4 || order == 16 || order == 64;
    }

    Constellation Constellation::qam(unsigned order)
    {
        if (!is_supported_qam_order(order))
            throw std::invalid_argument("QAM order " + std::to_string(order) + " is not supported (use 4, 16 or 64).");

        const unsigned side = unsigned(std::lround(std::sqrt(double(order))));
        const unsigned bits_axis = unsigned(std::lround(std::log2(double(side))));
        std::vector<std::complex<double>> pts;
        std::vector<unsigned> labels;
        pts.reserve(order);
        for (unsigned i = 0; i < side; ++i)
            for (unsigned q = 0; q < side; ++q)
            {
                pts.emplace_back(2.0 * i - (side - 1.0), 2.0 * q - (side - 1.0));
                const unsigned gi = i ^ (i >> 1), gq = q ^ (q >> 1);
                labels.push_back((gi << bits_axis) | gq);
            }
        return Constellation(std::move(pts), std::move(labels));
    }

    Constellation::Constellation(std::vector<std::complex<double>> points, std::vector<unsigned> labels)
        : points_(std::move(points)), labels_(std::move(labels))
    {
        if (points_.size() < 2)
            throw std::invalid_argument("A constellation needs at least two points.");
        if (!labels_.empty() && labels_.size() != points_.size())
            throw std::invalid_argument("Label count does not match the point count.");
        if (labels_.empty())
        {
            labels_.resize(points_.size());
            std::iota(labels_.begin(), labels_.end(), 0u);
        }

        const double e = average_energy();
        if (!(e > 0.0))
            throw std::invalid_argument("Constellation energy must be positive.");
        for (auto &p : points_)
            p /= std::sqrt(e);

        std::set<std::pair<double, double>> seen;
        for (const auto &p : points_)
            if (!seen.insert({p.real(), p.imag()}).second)
                throw std::invalid_argument("Constellation points must be distinct.");
    }

    double Constellation::bits_per_symbol() const
    {
        return std::log2(double(points_.size()));
    }

    double Constellation::average_energy() const
    {
        double e = 0.0;
        for (const auto &p : points_)
            e += std::norm(p);
        return e / double(points_.size());
    }
}
