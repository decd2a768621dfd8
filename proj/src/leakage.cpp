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

#include "dlsca/leakage.hpp"

#include <cmath>
#include <stdexcept>

#include "dlsca/rng.hpp"

namespace dlsca {

void LeakageSchedule::validate() const {
    if (cycles_per_group <= 0 || cycles_per_group % 4 != 0)
        throw std::invalid_argument("cycles_per_group must be positive and divisible by 4");
    if (start_cycle < 0 || total_cycles <= 0)
        throw std::invalid_argument("schedule cycle counts out of range");
    if (start_cycle + 4 * cycles_per_group > total_cycles)
        throw std::invalid_argument("first-round lookups do not fit in total_cycles");
    std::array<bool, 16> seen{};
    for (auto b : byte_order) {
        if (b >= 16 || seen[b])
            throw std::invalid_argument("byte_order is not a permutation of 0..15");
        seen[b] = true;
    }
}

int ActivityProgram::total_cycles() const {
    int total = 0;
    for (const auto &seg : segments)
        total += seg.total_cycles();
    return total;
}

namespace {

// Emits the voltage samples of one Aes segment. Walks real cycles while
// tracking the victim's base timeline; stall and interrupt spans freeze the
// base clock. At most one word is live at a time; with a tail constant,
// retired words keep drawing through an exponentially decaying term.
void render_aes_segment(const Segment &seg, const LeakageSchedule &schedule,
                        const aes::RoundKeys &keys,
                        const LeakageCoefficients &c, bool dma_active,
                        std::vector<double> &out) {
    const auto words = aes::first_round_ttable_words(keys, seg.plaintext);
    std::array<double, 16> dip{};
    for (int j = 0; j < 16; ++j)
        dip[j] = c.alpha_hw *
                 static_cast<double>(hamming_weight(words[schedule.byte_order[j]])) /
                 32.0;

    const int slot = schedule.slot_cycles();
    const double decay =
        c.pdn_tail_cycles > 0.0 ? std::exp(-1.0 / c.pdn_tail_cycles) : 0.0;
    const double base_v = c.v_nominal - (dma_active ? c.beta_dma : 0.0);

    double tail = 0.0;
    int base_cycle = 0;
    int stall_left = seg.stall_cycles;
    int irq_left = seg.irq_offset >= 0 ? seg.irq_stretch : 0;
    int live = -1; // position currently on the datapath

    const int total = seg.total_cycles();
    for (int u = 0; u < total; ++u) {
        tail *= decay;

        const bool in_stall = stall_left > 0 && base_cycle == schedule.start_cycle;
        const bool in_irq =
            irq_left > 0 && base_cycle == seg.irq_offset && !in_stall;

        double level = c.aes_level;
        int live_now = -1;
        if (in_stall) {
            --stall_left;
        } else if (in_irq) {
            level = c.irq_level;
            --irq_left;
        } else {
            if (base_cycle >= schedule.start_cycle &&
                base_cycle < schedule.start_cycle + 16 * slot)
                live_now = (base_cycle - schedule.start_cycle) / slot;
            ++base_cycle;
        }

        if (live_now != live) {
            if (live >= 0)
                tail += dip[live]; // word retires into the relaxation tail
            live = live_now;
        }

        double v = base_v - c.alpha_static * level - tail;
        if (live >= 0)
            v -= dip[live];
        out.push_back(v);
    }
}

} // namespace

void render_voltage_into(const ActivityProgram &program,
                         const LeakageSchedule &schedule,
                         const aes::RoundKeys &keys,
                         const LeakageCoefficients &coeffs, double noise_sigma,
                         std::uint64_t rng_seed, int min_cycles,
                         std::vector<double> &out) {
    if (program.segments.empty() || program.total_cycles() <= 0)
        throw std::invalid_argument("empty activity program");
    if (noise_sigma < 0.0)
        throw std::invalid_argument("noise_sigma must be non-negative");
    schedule.validate();

    out.clear();
    out.reserve(static_cast<std::size_t>(
        std::max(program.total_cycles(), min_cycles)));

    for (const auto &seg : program.segments) {
        switch (seg.kind) {
        case Segment::Kind::Aes: {
            if (seg.duration != schedule.total_cycles)
                throw std::invalid_argument("aes segment duration differs from schedule");
            render_aes_segment(seg, schedule, keys, coeffs, false, out);
            break;
        }
        case Segment::Kind::Strcmp: {
            const double v =
                coeffs.v_nominal - coeffs.alpha_static * seg.level;
            out.insert(out.end(), static_cast<std::size_t>(seg.duration), v);
            break;
        }
        case Segment::Kind::DmaOn: {
            const double v = coeffs.v_nominal -
                             coeffs.alpha_static * coeffs.idle_level -
                             coeffs.beta_dma;
            out.insert(out.end(), static_cast<std::size_t>(seg.duration), v);
            break;
        }
        case Segment::Kind::Idle:
        case Segment::Kind::DmaOff: {
            const double v =
                coeffs.v_nominal - coeffs.alpha_static * coeffs.idle_level;
            out.insert(out.end(), static_cast<std::size_t>(seg.duration), v);
            break;
        }
        }
    }

    if (static_cast<int>(out.size()) < min_cycles) {
        const double v = coeffs.v_nominal - coeffs.alpha_static * coeffs.idle_level;
        out.insert(out.end(), static_cast<std::size_t>(min_cycles) - out.size(), v);
    }

    if (noise_sigma > 0.0) {
        Rng rng(rng_seed);
        for (auto &v : out)
            v += noise_sigma * rng.gaussian();
    }
}

VoltageTrace render_voltage(const ActivityProgram &program,
                            const LeakageSchedule &schedule,
                            const aes::RoundKeys &keys,
                            const LeakageCoefficients &coeffs,
                            double noise_sigma, std::uint64_t rng_seed,
                            double clock_hz, int min_cycles) {
    VoltageTrace trace;
    trace.clock_hz = clock_hz;
    render_voltage_into(program, schedule, keys, coeffs, noise_sigma, rng_seed,
                        min_cycles, trace.samples);
    return trace;
}

} // namespace dlsca
