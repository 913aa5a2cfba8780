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

#ifndef BEAMSPACE_CONSTELLATION_H
#define BEAMSPACE_CONSTELLATION_H

#include <complex>
#include <cstdint>
#include <vector>

namespace beamspace
{
    // Finite input alphabet with unit average symbol energy
    class Constellation
    {
    public:
        // Square Gray-labelled QAM, order 4, 16 or 64
        static Constellation qam(unsigned order);

        // Arbitrary point list; rescaled to unit average energy. Points must be distinct.
        explicit Constellation(std::vector<std::complex<double>> points, std::vector<unsigned> labels = {});

        unsigned order() const { return unsigned(points_.size()); }
        double bits_per_symbol() const;
        const std::vector<std::complex<double>> &points() const { return points_; }
        const std::vector<unsigned> &labels() const { return labels_; }
        double average_energy() const;

    private:
        std::vector<std::complex<double>> points_;
        std::vector<unsigned> labels_;
    };

    bool is_supported_qam_order(unsigned order);
}

#endif
