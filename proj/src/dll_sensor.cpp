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

#include "dlsca/dll_sensor.hpp"

#include <cmath>
#include <stdexcept>

namespace dlsca {

double ThermalStimulus::temperature_at(double t_s,
                                       double t_nominal_kelvin) const {
    double temp = t_nominal_kelvin;
    for (const auto &ev : events) {
        if (t_s >= ev.time_s)
            temp += ev.delta_kelvin *
                    std::exp(-(t_s - ev.time_s) / recovery_time_constant_s);
    }
    return temp;
}

int DllConfig::nominal_command() const {
    return static_cast<int>(
        std::llround(target_phase_s / element_delay_nominal_s));
}

DllSensor::DllSensor(const DllConfig &cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg_.loop_gain <= 0.0 || cfg_.loop_gain > 1.0)
        throw std::invalid_argument("loop_gain must be in (0, 1]");
    if (cfg_.update_divider < 1)
        throw std::invalid_argument("update_divider must be >= 1");
    reset(seed);
}

void DllSensor::reset(std::uint64_t seed) {
    command_ = cfg_.nominal_command();
    cycle_ = 0;
    saturated_ = false;
    rng_.reseed(seed);
}

double DllSensor::ideal_command(double v, double t_kelvin) const {
    return cfg_.target_phase_s / cfg_.element_delay(v, t_kelvin);
}

void DllSensor::apply_feedback(double v, double t_kelvin) {
    double target = cfg_.target_phase_s;
    if (cfg_.phase_jitter_s > 0.0)
        target += cfg_.phase_jitter_s * rng_.gaussian();
    const double ideal = target / cfg_.element_delay(v, t_kelvin);
    const double err = ideal - static_cast<double>(command_);
    if (std::abs(err) <= static_cast<double>(cfg_.deadband_lsb))
        return;
    int next = static_cast<int>(
        std::llround(static_cast<double>(command_) + cfg_.loop_gain * err));
    if (next < 1) {
        next = 1;
        saturated_ = true;
    } else if (next > cfg_.max_command()) {
        next = cfg_.max_command();
        saturated_ = true;
    }
    command_ = next;
}

void DllSensor::tick(double v, double t_kelvin) {
    if (cycle_ % static_cast<std::uint64_t>(cfg_.update_divider) == 0)
        apply_feedback(v, t_kelvin);
    ++cycle_;
}

SensorTrace run_temperature_demo(const DllConfig &cfg,
                                 const ThermalStimulus &stimulus,
                                 double duration_s, double read_rate_hz,
                                 int average_block, double noise_sigma_v,
                                 std::uint64_t seed, int updates_per_read) {
    if (read_rate_hz <= 0.0 || duration_s <= 0.0 || average_block < 1)
        throw std::invalid_argument("bad temperature-demo parameters");

    DllSensor dll(cfg, seed);
    Rng noise(derive_seed(seed, 0x74656d70ULL));

    const long total_reads =
        static_cast<long>(duration_s * read_rate_hz);
    SensorTrace trace;
    trace.rate_hz = read_rate_hz / static_cast<double>(average_block);
    trace.average_block = average_block;
    trace.samples.reserve(static_cast<std::size_t>(total_reads / average_block));

    std::int64_t block_sum = 0;
    int in_block = 0;
    for (long i = 0; i < total_reads; ++i) {
        const double t_s = static_cast<double>(i) / read_rate_hz;
        const double temp =
            stimulus.temperature_at(t_s, cfg.t_nominal_kelvin);
        for (int u = 0; u < updates_per_read; ++u) {
            const double v =
                cfg.v_nominal +
                (noise_sigma_v > 0.0 ? noise_sigma_v * noise.gaussian() : 0.0);
            dll.apply_feedback(v, temp);
        }
        block_sum += dll.read_command();
        if (++in_block == average_block) {
            trace.samples.push_back(static_cast<std::int32_t>(block_sum));
            block_sum = 0;
            in_block = 0;
        }
    }
    return trace;
}

} // namespace dlsca
