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

#include "dlsca/acquisition.hpp"

#include <cmath>
#include <cstdio>

#include "dlsca/errors.hpp"
#include "dlsca/rng.hpp"

namespace dlsca {

namespace {

constexpr std::uint64_t kTagAcquisition = 0x61637175; // per-index streams
constexpr std::uint64_t kTagNoise = 0x6e6f6973;
constexpr std::uint64_t kTagSensor = 0x73656e73;
constexpr std::uint64_t kTagAmbient = 0x616d6269;
constexpr std::uint64_t kTagHpcCal = 0x68706363;

struct VictimDraws {
    aes::Block pt;
    int stall = 0;
    int irq_offset = -1;
    int irq_stretch = 0;
};

// All victim-side randomness for one acquisition, in a fixed draw order.
VictimDraws draw_victim(Rng &rng, const VictimSpec &victim,
                        const InterruptModel &interrupts) {
    VictimDraws d;
    for (auto &b : d.pt.bytes)
        b = static_cast<std::uint8_t>(rng.next_u64() & 0xff);
    if (victim.random_delays.enabled &&
        victim.random_delays.amplitude_cycles > 0) {
        d.stall = static_cast<int>(rng.uniform_below(
            static_cast<std::uint64_t>(victim.random_delays.amplitude_cycles) +
            1));
    }
    if (interrupts.probability > 0.0 &&
        rng.uniform() < interrupts.probability) {
        d.irq_offset = static_cast<int>(rng.uniform_below(
            static_cast<std::uint64_t>(victim.schedule.total_cycles)));
        d.irq_stretch = rng.geometric(interrupts.stretch_mean_cycles,
                                      interrupts.stretch_cap_cycles);
    }
    return d;
}

std::uint32_t encryption_cycles(const VictimSpec &victim,
                                const VictimDraws &d) {
    std::uint32_t c =
        static_cast<std::uint32_t>(victim.schedule.total_cycles + d.stall);
    if (d.irq_offset >= 0)
        c += static_cast<std::uint32_t>(d.irq_stretch);
    return c;
}

} // namespace

void SamplerConfig::validate() const {
    if (sample_period_s <= 0.0)
        throw ConfigError("sample_period_s must be positive");
    if (n_samples < 1)
        throw ConfigError("n_samples must be at least 1");
}

ActivityProgram VictimSpec::build_program(const aes::Block &pt,
                                          int stall_cycles, int irq_offset,
                                          int irq_stretch) const {
    ActivityProgram program;
    if (dma_on_cycles > 0)
        program.segments.push_back(Segment::dma_on(dma_on_cycles));
    if (pre_idle_cycles > 0)
        program.segments.push_back(Segment::idle(pre_idle_cycles));
    Segment enc = Segment::aes(pt, schedule.total_cycles);
    enc.stall_cycles = stall_cycles;
    enc.irq_offset = irq_offset;
    enc.irq_stretch = irq_stretch;
    program.segments.push_back(enc);
    if (post_idle_cycles > 0)
        program.segments.push_back(Segment::idle(post_idle_cycles));
    return program;
}

int in_window_samples(const SamplerConfig &sampler, double clock_hz,
                      int aes_start, int aes_cycles) {
    const double period = sampler.effective_period_s() * clock_hz;
    int count = 0;
    for (int k = 0; k < sampler.n_samples; ++k) {
        const double t = sampler.start_offset_cycles + k * period;
        if (t >= aes_start && t < aes_start + aes_cycles)
            ++count;
    }
    return count;
}

AcquisitionResult acquire_one(Sensor &sensor, const VictimSpec &victim,
                              const aes::Block &pt,
                              const SamplerConfig &sampler,
                              const InterruptModel &interrupts,
                              double temperature_kelvin, std::uint64_t seed,
                              std::vector<double> *voltage_scratch) {
    sampler.validate();

    Rng rng(seed);
    VictimDraws draws = draw_victim(rng, victim, interrupts);
    draws.pt = pt; // caller-provided text replaces the drawn one

    const double period_cycles =
        sampler.effective_period_s() * victim.clock_hz;
    const int last_cycle_needed = static_cast<int>(
        sampler.start_offset_cycles + (sampler.n_samples - 1) * period_cycles) + 1;

    const ActivityProgram program = victim.build_program(
        draws.pt, draws.stall, draws.irq_offset, draws.irq_stretch);

    static thread_local std::vector<double> local_scratch;
    std::vector<double> &voltage =
        voltage_scratch ? *voltage_scratch : local_scratch;
    render_voltage_into(program, victim.schedule, victim.round_keys,
                        victim.coeffs, victim.noise_sigma,
                        derive_seed(seed, kTagNoise), last_cycle_needed,
                        voltage);

    sensor.start_acquisition(voltage, temperature_kelvin,
                             derive_seed(seed, kTagSensor));

    AcquisitionResult result;
    result.pt = draws.pt;
    result.ct = aes::encrypt(victim.round_keys, draws.pt);
    result.cycle_count = encryption_cycles(victim, draws);
    result.trace.resize(static_cast<std::size_t>(sampler.n_samples));
    for (int k = 0; k < sampler.n_samples; ++k) {
        const int cycle = static_cast<int>(sampler.start_offset_cycles +
                                           k * period_cycles);
        result.trace[static_cast<std::size_t>(k)] = sensor.read_at_cycle(cycle);
    }
    return result;
}

int calibrate_min_reference(const VictimSpec &victim,
                            const InterruptModel &interrupts, int n_probes,
                            std::uint64_t seed) {
    if (n_probes < 100)
        throw ConfigError("min-reference calibration needs >= 100 probes");
    // Duration statistics do not depend on the sensor or sampler; redo only
    // the victim-side draws.
    std::uint32_t best = ~0u;
    for (int i = 0; i < n_probes; ++i) {
        Rng rng(derive_seed(seed, kTagHpcCal, static_cast<std::uint64_t>(i)));
        const VictimDraws d = draw_victim(rng, victim, interrupts);
        best = std::min(best, encryption_cycles(victim, d));
    }
    return static_cast<int>(best);
}

void acquire_stream(
    int n_acq, Sensor &sensor, const VictimSpec &victim,
    const SamplerConfig &sampler, const InterruptModel &interrupts,
    const HpcFilter &hpc, std::uint64_t master_seed,
    double ambient_sigma_kelvin, double ambient_tau_acq,
    const std::function<void(int, const AcquisitionResult &, bool)> &sink) {
    if (n_acq < 1)
        throw ConfigError("n_acq must be at least 1");

    const int aes_start = victim.aes_start_cycle();
    if (in_window_samples(sampler, victim.clock_hz, aes_start,
                          victim.schedule.total_cycles) < 1)
        std::fprintf(stderr,
                     "warning: sampler window does not cover the encryption\n");

    // Slow package-temperature wander across acquisitions (an
    // Ornstein-Uhlenbeck walk); flat within each microsecond-scale trace.
    Rng ambient_rng(derive_seed(master_seed, kTagAmbient));
    const double decay =
        ambient_tau_acq > 0.0 ? std::exp(-1.0 / ambient_tau_acq) : 0.0;
    const double drive =
        ambient_sigma_kelvin * std::sqrt(1.0 - decay * decay);
    double ambient_offset = 0.0;

    const double t_nominal = 300.0;
    std::vector<double> scratch;
    long retained_count = 0;
    for (int i = 0; i < n_acq; ++i) {
        if (ambient_sigma_kelvin > 0.0)
            ambient_offset =
                ambient_offset * decay + drive * ambient_rng.gaussian();
        const std::uint64_t seed = derive_seed(master_seed, kTagAcquisition,
                                               static_cast<std::uint64_t>(i));
        Rng pt_rng(seed);
        aes::Block pt;
        for (auto &b : pt.bytes)
            b = static_cast<std::uint8_t>(pt_rng.next_u64() & 0xff);

        const AcquisitionResult result =
            acquire_one(sensor, victim, pt, sampler, interrupts,
                        t_nominal + ambient_offset, seed, &scratch);
        const bool retained =
            result.cycle_count <= static_cast<std::uint32_t>(hpc.threshold());
        retained_count += retained ? 1 : 0;
        sink(i, result, retained);
    }

    if (retained_count * 100 < n_acq)
        throw StarvationError(
            "HPC filter retained less than 1% of acquisitions");
}

AcquisitionSet acquire_set(int n_acq, Sensor &sensor, const VictimSpec &victim,
                           const SamplerConfig &sampler,
                           const InterruptModel &interrupts,
                           const HpcFilter &hpc, std::uint64_t master_seed,
                           double ambient_sigma_kelvin,
                           double ambient_tau_acq) {
    AcquisitionSet set;
    set.n_samples = static_cast<std::uint32_t>(sampler.n_samples);
    set.sensor_kind = static_cast<std::uint8_t>(sensor.kind());
    set.plaintexts.reserve(static_cast<std::size_t>(n_acq));
    set.samples.reserve(static_cast<std::size_t>(n_acq) * set.n_samples);

    acquire_stream(n_acq, sensor, victim, sampler, interrupts, hpc,
                   master_seed, ambient_sigma_kelvin, ambient_tau_acq,
                   [&](int, const AcquisitionResult &r, bool retained) {
                       set.plaintexts.push_back(r.pt.bytes);
                       set.ciphertexts.push_back(r.ct.bytes);
                       set.cycle_counts.push_back(r.cycle_count);
                       set.retained.push_back(retained ? 1 : 0);
                       set.samples.insert(set.samples.end(), r.trace.begin(),
                                          r.trace.end());
                   });
    return set;
}

} // namespace dlsca
