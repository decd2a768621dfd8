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

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

#include "dlsca/aes_ttable.hpp"

namespace dlsca {

inline int hamming_weight(std::uint32_t w) { return std::popcount(w); }

/// Order in which the 32-bit round-table words are computed: the four output
/// words of the round each consume one state byte per row.
constexpr std::array<std::uint8_t, 16> kTTableByteOrder = {
    0, 5, 10, 15, 4, 9, 14, 3, 8, 13, 2, 7, 12, 1, 6, 11};

/// Placement of the first-round lookups inside an encryption. Position j in
/// the computation order occupies cycles [leak_start(j), leak_start(j)+slot);
/// the looked-up word stays live on the datapath for the whole slot.
struct LeakageSchedule {
    std::array<std::uint8_t, 16> byte_order = kTTableByteOrder;
    int cycles_per_group = 20; // per output word (4 lookups); divisible by 4
    int start_cycle = 40;
    int total_cycles = 837;

    int slot_cycles() const { return cycles_per_group / 4; }
    int leak_start(int position) const {
        return start_cycle + position * slot_cycles();
    }
    void validate() const;
};

struct Segment {
    enum class Kind { Idle, Aes, Strcmp, DmaOn, DmaOff };

    Kind kind = Kind::Idle;
    int duration = 0;         // base duration in core cycles
    aes::Block plaintext{};   // Aes only
    double level = 0.0;       // Strcmp activity level
    int stall_cycles = 0;     // Aes: random stall inserted before lookup 0
    int irq_offset = -1;      // Aes: interrupt insertion point, base-relative
    int irq_stretch = 0;      // Aes: inserted cycles

    int total_cycles() const {
        int
            t = duration;
        if (kind == Kind::Aes) {
            t += stall_cycles;
            if (irq_offset >= 0)
                t += irq_stretch;
        }
        return t;
    }

    static Segment idle(int cycles) { return {Kind::Idle, cycles, {}, 0.0, 0, -1, 0}; }
    static Segment dma_on(int cycles) { return {Kind::DmaOn, cycles, {}, 0.0, 0, -1, 0}; }
    static Segment dma_off(int cycles) { return {Kind::DmaOff, cycles, {}, 0.0, 0, -1, 0}; }
    static Segment strcmp_burst(int cycles, double lvl) {
        return {Kind::Strcmp, cycles, {}, lvl, 0, -1, 0};
    }
    static Segment aes(const aes::Block &pt, int cycles) {
        return {Kind::Aes, cycles, pt, 0.0, 0, -1, 0};
    }
};

struct ActivityProgram {
    std::vector<Segment> segments;
    int total_cycles() const;
};

struct LeakageCoefficients {
    double v_nominal = 1.0;
    double alpha_static = 0.010; // V per unit of activity level
    double alpha_hw = 0.005;     // V of dip at HW = 32
    double beta_dma = 0.015;     // V while the DMA engine is switching on
    double idle_level = 0.30;
    double aes_level = 0.80;
    double irq_level = 0.55;
    // Supply relaxation after a word retires from the datapath; 0 disables
    // the tail and each word's dip is confined to its own slot.
    double pdn_tail_cycles = 0.0;
};

struct VoltageTrace {
    std::vector<double> samples;
    double clock_hz = 0.0;
};

/// Per-cycle supply voltage for a victim program. Deterministic for a fixed
/// seed. `min_cycles` pads the program with trailing idle so a sampler window
/// longer than the program stays covered.
VoltageTrace render_voltage(const ActivityProgram &program,
                            const LeakageSchedule &schedule,
                            const aes::RoundKeys &keys,
                            const LeakageCoefficients &coeffs,
                            double noise_sigma, std::uint64_t rng_seed,
                            double clock_hz, int min_cycles = 0);

/// Same, reusing the caller's buffer (hot path for bulk acquisition).
void render_voltage_into(const ActivityProgram &program,
                         const LeakageSchedule &schedule,
                         const aes::RoundKeys &keys,
                         const LeakageCoefficients &coeffs, double noise_sigma,
                         std::uint64_t rng_seed, int min_cycles,
                         std::vector<double> &out);

} // namespace dlsca
