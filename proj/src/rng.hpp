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

#ifndef BEAMSPACE_RNG_H
#define BEAMSPACE_RNG_H

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace beamspace::detail
{
    inline std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Substream key from a root seed and a list of coordinates
    inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::int64_t> coords)
    {
        std::uint64_t h = splitmix64(seed);
        for (auto c : coords)
            h = splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(c)));
        return h;
    }

    // The std distributions are implementation-defined; these are not, so outputs
    // are identical across standard libraries.
    class Stream
    {
    public:
        explicit Stream(std::uint64_t key) : engine_(key) {}

        double uniform() // [0, 1)
        {
            return double(engine_() >> 11) * 0x1.0p-53;
        }

        double uniform(double lo, double hi)
        {
            return lo + (hi - lo) * uniform();
        }

        double normal()
        {
            if (has_spare_)
            {
                has_spare_ = false;
                return spare_;
            }
            double u1 = 0.0;
            do
                u1 = uniform();
            while (u1 <= 0.0);
            double u2 = uniform();
            double r = std::sqrt(-2.0 * std::log(u1));
            spare_ = r * std::sin(6.283185307179586 * u2);
            has_spare_ = true;
            return r * std::cos(6.283185307179586 * u2);
        }

        // Circularly symmetric complex Gaussian, E|z|^2 = variance
        std::complex<double> complex_normal(double variance = 1.0)
        {
            double s = std::sqrt(0.5 * variance);
            double re = normal();
            double im = normal();
            return {s * re, s * im};
        }

        std::uint64_t next() { return engine_(); }

    private:
        std::mt19937_64 engine_;
        double spare_ = 0.0;
        bool has_spare_ = false;
    };
}

#endif
