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
#include <memory>
#include <span>

#include "dlsca/delay_block.hpp"
#include "dlsca/dll_sensor.hpp"

namespace dlsca {

enum class SensorKind : std::uint8_t { Dll = 0, DelayBlock = 1, Ideal = 2 };

/// Register-readout view of a sensor during one acquisition. Acquisitions are
/// independent: start_acquisition re-locks the sensor at its nominal state so
/// per-index seeds fully determine each trace.
class Sensor {
  public:
    virtual ~Sensor() = default;

    virtual void start_acquisition(std::span<const double> voltage,
                                   double temperature_kelvin,
                                   std::uint64_t seed) = 0;

    /// Register value at the given core cycle. Cycles must be non-decreasing
    /// within one acquisition.
    virtual std::int32_t read_at_cycle(int cycle) = 0;

    virtual SensorKind kind() const = 0;
};

/// DLL command register: the loop ticks every core cycle and the read returns
/// the current integer command.
class DllRegisterSensor final : public Sensor {
  public:
    explicit DllRegisterSensor(const DllConfig &cfg) : dll_(cfg) {}

    void start_acquisition(std::span<const double> voltage,
                           double temperature_kelvin,
                           std::uint64_t seed) override {
        v_ = voltage;
        temp_ = temperature_kelvin;
        pos_ = 0;
        dll_.reset(seed);
    }

    std::int32_t read_at_cycle(int cycle) override {
        const int limit =
            cycle < static_cast<int>(v_.size()) ? cycle : static_cast<int>(v_.size()) - 1;
        while (pos_ <= limit) {
            dll_.tick(v_[static_cast<std::size_t>(pos_)], temp_);
            ++pos_;
        }
        return dll_.read_command();
    }

    SensorKind kind() const override { return SensorKind::Dll; }

    DllSensor &dll() { return dll_; }

  private:
    DllSensor dll_;
    std::span<const double> v_;
    double temp_ = 0.0;
    int pos_ = 0;
};

/// Decoded TDC value of the delay-block at the sampled cycle.
class DelayBlockTdcSensor final : public Sensor {
  public:
    DelayBlockTdcSensor(const DelayBlockConfig &cfg, double clock_hz,
                        bool metastability)
        : db_(cfg, 1, clock_hz) {
        db_.set_metastability(metastability);
    }

    void start_acquisition(std::span<const double> voltage,
                           double temperature_kelvin,
                           std::uint64_t seed) override {
        v_ = voltage;
        temp_ = temperature_kelvin;
        db_.reseed(seed);
    }

    std::int32_t read_at_cycle(int cycle) override {
        const auto end = static_cast<std::size_t>(cycle) + 1;
        return db_.read(v_.first(end < v_.size() ? end : v_.size()), temp_);
    }

    SensorKind kind() const override { return SensorKind::DelayBlock; }

    DelayBlockSensor &block() { return db_; }

  private:
    DelayBlockSensor db_;
    std::span<const double> v_;
    double temp_ = 0.0;
};

/// Diagnostic tap returning the supply deviation itself on a fine integer
/// grid (1 LSB = 1 nV), i.e. an effectively unquantized sensor.
class IdealVoltageSensor final : public Sensor {
  public:
    explicit IdealVoltageSensor(double v_nominal = 1.0)
        : v_nominal_(v_nominal) {}

    void start_acquisition(std::span<const double> voltage,
                           double temperature_kelvin,
                           std::uint64_t seed) override {
        (void)temperature_kelvin;
        (void)seed;
        v_ = voltage;
    }

    std::int32_t read_at_cycle(int cycle) override {
        const auto idx = static_cast<std::size_t>(
            cycle < static_cast<int>(v_.size()) ? cycle
                                                : static_cast<int>(v_.size()) - 1);
        return static_cast<std::int32_t>((v_[idx] - v_nominal_) * 1e9);
    }

    SensorKind kind() const override { return SensorKind::Ideal; }

  private:
    double v_nominal_;
    std::span<const double> v_;
};

} // namespace dlsca
