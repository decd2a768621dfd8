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

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dlsca/leakage.hpp"
#include "dlsca/sensor.hpp"
#include "dlsca/trace_set.hpp"

namespace dlsca {

/// Fixed-period register sampler; the optional throttle models the
/// rate-limiting mitigation and stretches the effective period.
struct SamplerConfig {
    double sample_period_s = 62.5e-9;
    int n_samples = 32;
    double start_offset_cycles = 0.0;
    std::optional<double> throttle_hz;

    double effective_period_s() const {
        if (throttle_hz && *throttle_hz > 0.0 &&
            1.0 / *throttle_hz > sample_period_s)
            return 1.0 / *throttle_hz;
        return sample_period_s;
    }
    void validate() const;
};

struct InterruptModel {
    double probability = 0.0; // per encryption
    double stretch_mean_cycles = 200.0;
    int stretch_cap_cycles = 10000;
};

struct HpcFilter {
    int min_reference_cycles = 0;
    int margin_cycles = 30;
    int threshold() const { return min_reference_cycles + margin_cycles; }
};

/// Victim-side mitigation: a uniformly random stall, up to amplitude_cycles,
/// inserted in front of the round-table lookups. The scenario layer sizes the
/// amplitude in sampler periods and converts to cycles.
struct RandomDelayCountermeasure {
    bool enabled = false;
    int amplitude_cycles = 0;
};

/// Everything the victim side contributes to one acquisition.
struct VictimSpec {
    double clock_hz = 667e6;
    aes::AesKey key;
    aes::RoundKeys round_keys;
    LeakageSchedule schedule;
    LeakageCoefficients coeffs;
    double noise_sigma = 0.0;
    int dma_on_cycles = 130;  // DMA activation burst opening the trace
    int pre_idle_cycles = 162;
    int post_idle_cycles = 300;
    RandomDelayCountermeasure random_delays;

    int aes_start_cycle() const { return dma_on_cycles + pre_idle_cycles; }
    ActivityProgram build_program(const aes::Block &pt, int stall_cycles,
                                  int irq_offset, int irq_stretch) const;
};

struct AcquisitionResult {
    std::vector<std::int32_t> trace;
    std::uint32_t cycle_count = 0;
    aes::Block pt;
    aes::Block ct;
};

/// Samples falling inside [aes_start, aes_start + aes_cycles).
int in_window_samples(const SamplerConfig &sampler, double clock_hz,
                      int aes_start, int aes_cycles);

/// One synchronized acquisition: renders the victim supply, steps the sensor,
/// reads the register at every sampler instant and reports the cycle count
/// the attacker's performance counter would see for the encryption.
AcquisitionResult acquire_one(Sensor &sensor, const VictimSpec &victim,
                              const aes::Block &pt,
                              const SamplerConfig &sampler,
                              const InterruptModel &interrupts,
                              double temperature_kelvin, std::uint64_t seed,
                              std::vector<double> *voltage_scratch = nullptr);

/// Minimum observed encryption cycle count over n_probes runs; the basis of
/// the discard threshold.
int calibrate_min_reference(const VictimSpec &victim,
                            const InterruptModel &interrupts, int n_probes,
                            std::uint64_t seed);

/// Streaming acquisition loop with fresh random plaintexts: calls `sink` for
/// every acquisition in index order. Throws StarvationError if fewer than 1%
/// of acquisitions pass the filter.
void acquire_stream(
    int n_acq, Sensor &sensor, const VictimSpec &victim,
    const SamplerConfig &sampler, const InterruptModel &interrupts,
    const HpcFilter &hpc, std::uint64_t master_seed,
    double ambient_sigma_kelvin, double ambient_tau_acq,
    const std::function<void(int index, const AcquisitionResult &,
                             bool retained)> &sink);

/// Batch variant building the full in-memory set.
AcquisitionSet acquire_set(int n_acq, Sensor &sensor, const VictimSpec &victim,
                           const SamplerConfig &sampler,
                           const InterruptModel &interrupts,
                           const HpcFilter &hpc, std::uint64_t master_seed,
                           double ambient_sigma_kelvin = 0.0,
                           double ambient_tau_acq = 1000.0);

} // namespace dlsca
