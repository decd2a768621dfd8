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
#include <vector>

#include "dlsca/rng.hpp"

namespace dlsca {

/// Integer samples read from a sensor register.
struct SensorTrace {
    std::vector<std::int32_t> samples;
    double rate_hz = 0.0;
    /// For block-averaged traces the stored sample is the block sum; divide
    /// by this to get the averaged register value.
    int average_block = 1;
};

/// Step events on the package temperature, each relaxing back to ambient
/// with the given time constant.
struct ThermalStimulus {
    struct StepEvent {
        double time_s = 0.0;
        double delta_kelvin = 0.0;
    };
    std::vector<StepEvent> events;
    double recovery_time_constant_s = 1.0;

    double temperature_at(double t_s, double t_nominal_kelvin) const;
};

struct DllConfig {
    double target_phase_s = 204.8e-9;
    double element_delay_nominal_s = 100e-12;
    // Relative delay change per volt; negative: higher supply, faster gates.
    double kv_per_volt = -0.5;
    // Relative delay increase per kelvin of cooling (inverse temperature
    // dependence): cooling slows the line and the command drops.
    double kt_per_kelvin = 0.002;
    double loop_gain = 0.15;
    int deadband_lsb = 0;
    int update_divider = 4; // feedback update every N core cycles
    int register_bits = 12;
    double v_nominal = 1.0;
    double t_nominal_kelvin = 300.0;
    double phase_jitter_s = 0.0; // mitigation knob: jitter on the phase compare

    double element_delay(double v, double t_kelvin) const {
        return element_delay_nominal_s *
               (1.0 + kv_per_volt * (v - v_nominal) +
                kt_per_kelvin * (t_nominal_kelvin - t_kelvin));
    }
    int nominal_command() const;
    int max_command() const { return (1 << register_bits) - 1; }
};

/// Behavioral model of a DDR-controller delay-locked loop. The feedback
/// drives the integer command register toward target_phase / element_delay;
/// reading the register has no effect on the loop.
class DllSensor {
  public:
    explicit DllSensor(const DllConfig &cfg, std::uint64_t seed = 1);

    void reset(std::uint64_t seed);

    /// One feedback update against the instantaneous supply and temperature.
    void apply_feedback(double v, double t_kelvin);

    /// One core clock cycle; applies feedback every update_divider cycles.
    void tick(double v, double t_kelvin);

    int read_command() const { return command_; }
    bool saturated() const { return saturated_; }

    /// Unquantized loop target, target_phase / element_delay(v, t).
    double ideal_command(double v, double t_kelvin) const;

    const DllConfig &config() const { return cfg_; }

  private:
    DllConfig cfg_;
    int command_ = 0;
    std::uint64_t cycle_ = 0;
    bool saturated_ = false;
    Rng rng_;
};

/// Slow-sampled register readout under a thermal stimulus: `average_block`
/// consecutive reads are summed per stored sample.
SensorTrace run_temperature_demo(const DllConfig &cfg,
                                 const ThermalStimulus &stimulus,
                                 double duration_s, double read_rate_hz,
                                 int average_block, double noise_sigma_v,
                                 std::uint64_t seed,
                                 int updates_per_read = 4);

} // namespace dlsca
