/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>

namespace dlsca {

/// splitmix64 step; used for seed derivation so that per-index streams are
/// independent of worker count and platform.
inline std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive a named sub-stream seed from a master seed. `tag` distinguishes
/// streams (plaintexts, noise, interrupts, ...), `index` the acquisition.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                 std::uint64_t index = 0) {
    std::uint64_t s = master ^ (tag * 0x9e3779b97f4a7c15ULL);
    s ^= index + 0x632be59bd9b4e019ULL;
    splitmix64(s);
    return splitmix64(s);
}

/// xoshiro256** with Box-Muller gaussians. The stdlib distributions are not
/// bit-reproducible across implementations, which breaks the byte-identical
/// trace-file contract, so the few draws we need are implemented here.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 1) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto &w : s_)
            w = splitmix64(sm);
        has_spare_ = false;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound).
    std::uint64_t uniform_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound));
    }

    /// Standard normal via Box-Muller (deterministic given the seed).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

    /// Geometric on {1, 2, ...} with the given mean, capped at `cap`.
    int geometric(double mean_value, int cap) {
        if (mean_value <= 1.0)
            return 1;
        const double p = 1.0 / mean_value;
        double u = uniform();
        while (u <= 0.0)
            u = uniform();
        const int k = 1 + static_cast<int>(std::log(u) / std::log(1.0 - p));
        return k > cap ? cap : k;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace dlsca
