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
#include <cstdint>
#include <optional>
#include <span>

#include "dlsca/rng.hpp"

namespace dlsca {

/// 12 capture-register bits; element 0 is the most significant bit of the
/// printed hex value.
struct Snapshot {
    std::uint16_t bits = 0;
    bool operator==(const Snapshot &) const = default;
};

struct DelayBlockConfig {
    double clk_period_s = 20e-9;
    // Clock distribution path in front of the line, in clock periods. It is
    // made of the same gates as the line, so it scales with supply and
    // temperature but not with the delay setting.
    double route_delay_periods = 2.125;
    // Per-element process variation, multiplying the programmed delay.
    std::array<double, 12> element_mismatch = {1.0, 0.7,  1.3,  1.0, 1.0, 1.0,
                                               1.0, 1.14, 0.86, 1.0, 1.0, 1.3};
    // base(t) = d_min + t * d_step; base(64) = clk_period/4 with defaults.
    double d_min_s = 4.5e-9;
    double d_step_s = 7.8125e-12;
    int reference_setting = 64;
    double kv_per_volt = -0.5;
    double kt_per_kelvin = 0.002; // delay increase per kelvin of cooling
    double v_nominal = 1.0;
    double t_nominal_kelvin = 300.0;
    // A bit whose sampling point lies within this fraction of its element
    // delay from a clock transition resolves randomly. Disabled in noiseless
    // runs so an idealized simulation stays deterministic.
    double metastable_slot_fraction = 0.05;

    double base_delay(int t_setting) const {
        return d_min_s + static_cast<double>(t_setting) * d_step_s;
    }
    double supply_factor(double v, double t_kelvin) const {
        return 1.0 + kv_per_volt * (v - v_nominal) +
               kt_per_kelvin * (t_nominal_kelvin - t_kelvin);
    }
};

/// Programmable delay-block repurposed as a time-to-digital converter: the
/// capture register snapshots the clock image propagating through the line,
/// and the decoder turns the three edge positions into a scalar delay value.
class DelayBlockSensor {
  public:
    /// clock_hz is the victim core clock used to index voltage history in
    /// cycles; pass 0 when only quasi-static captures are needed.
    DelayBlockSensor(const DelayBlockConfig &cfg, std::uint64_t seed,
                     double clock_hz = 0.0);

    void set_setting(int t_setting);
    int setting() const { return t_setting_; }

    void reseed(std::uint64_t seed) { rng_.reseed(seed); }
    void set_metastability(bool enabled) { metastability_ = enabled; }

    /// Quasi-static capture: the whole line sees the same supply level.
    Snapshot capture(double v, double t_kelvin);

    /// Capture against per-cycle supply history; history.back() is the cycle
    /// the capture clock edge occurs on, earlier entries are earlier cycles.
    /// Each element sees the supply at the time the clock image traversed it.
    Snapshot capture(std::span<const double> history, double t_kelvin);

    /// Scalar delay value: an offset minus the sum of the three rising-edge
    /// positions, so that slower propagation gives a larger value. Empty on
    /// an implausible snapshot (no transition, or more than one clock edge
    /// pair inside a nibble, or not exactly three rising edges).
    static std::optional<int> decode(Snapshot snapshot);

    /// capture + decode; retries once on an undecodable snapshot and throws
    /// DecodeError if the retry also fails.
    int read(double v, double t_kelvin);
    int read(std::span<const double> history, double t_kelvin);

    /// Sweeps all 128 settings, taking n_probes snapshots per setting under
    /// ambient supply noise, and selects the decodable setting with the most
    /// capture-to-capture instability. Throws CalibrationError if every
    /// setting is stable.
    int calibrate(int n_probes, double ambient_sigma_v);

    /// Instability fraction per setting from the last calibrate() call.
    const std::array<double, 128> &instability_histogram() const {
        return instability_;
    }

    int decode_retries() const { return decode_retries_; }

    /// Smallest distance (in element-delay slots) from any sampled line tap
    /// to a clock transition, at nominal supply. Near-zero means the setting
    /// sits on a metastable boundary.
    double min_edge_distance_slots(int t_setting) const;

    const DelayBlockConfig &config() const { return cfg_; }

  private:
    template <typename VoltageAt>
    Snapshot capture_impl(VoltageAt &&v_at, double t_kelvin);

    DelayBlockConfig cfg_;
    int t_setting_;
    double clock_hz_;
    bool metastability_ = true;
    int decode_retries_ = 0;
    std::array<double, 128> instability_{};
    Rng rng_;
};

} // namespace dlsca
