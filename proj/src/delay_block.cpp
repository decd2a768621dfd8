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

#include "dlsca/delay_block.hpp"

#include <cmath>
#include <stdexcept>

#include "dlsca/errors.hpp"

namespace dlsca {

namespace {

double frac(double x) { return x - std::floor(x); }

// Level of the clock image at phase x (periods); high in the first half.
bool level_high(double x) { return frac(x) < 0.5; }

} // namespace

DelayBlockSensor::DelayBlockSensor(const DelayBlockConfig &cfg,
                                   std::uint64_t seed, double clock_hz)
    : cfg_(cfg), t_setting_(cfg.reference_setting), clock_hz_(clock_hz),
      rng_(seed) {
    if (cfg_.clk_period_s <= 0.0 || cfg_.d_min_s <= 0.0 || cfg_.d_step_s < 0.0)
        throw std::invalid_argument("bad delay-block configuration");
}

void DelayBlockSensor::set_setting(int t_setting) {
    if (t_setting < 0 || t_setting > 127)
        throw std::invalid_argument("delay setting must be in 0..127");
    t_setting_ = t_setting;
}

template <typename VoltageAt>
Snapshot DelayBlockSensor::capture_impl(VoltageAt &&v_at, double t_kelvin) {
    const double period = cfg_.clk_period_s;
    const double base = cfg_.base_delay(t_setting_);

    // Route delay, scaled by the supply seen midway along the route.
    const double route_nominal = cfg_.route_delay_periods * period;
    double tau =
        route_nominal * cfg_.supply_factor(v_at(0.5 * route_nominal), t_kelvin);

    std::uint16_t bits = 0;
    for (int j = 0; j < 12; ++j) {
        const double d_nom = base * cfg_.element_mismatch[j];
        // First-order: the element's delay is evaluated at the supply seen
        // when the image traversed it, looked up via nominal offsets.
        const double lookback =
            route_nominal + (static_cast<double>(j) + 0.5) * d_nom;
        const double d = d_nom * cfg_.supply_factor(v_at(lookback), t_kelvin);
        tau += d;

        double x = frac(-tau / period);
        if (metastability_ && cfg_.metastable_slot_fraction > 0.0) {
            const double band = cfg_.metastable_slot_fraction * (d / period);
            const double dist =
                std::min(std::abs(x - 0.5), std::min(x, 1.0 - x));
            if (dist < band)
                x = frac(x + band * (2.0 * rng_.uniform() - 1.0));
        }
        bits = static_cast<std::uint16_t>((bits << 1) | (level_high(x) ? 1 : 0));
    }
    return Snapshot{bits};
}

Snapshot DelayBlockSensor::capture(double v, double t_kelvin) {
    return capture_impl([v](double) { return v; }, t_kelvin);
}

Snapshot DelayBlockSensor::capture(std::span<const double> history,
                                   double t_kelvin) {
    if (history.empty())
        throw std::invalid_argument("empty voltage history");
    if (clock_hz_ <= 0.0)
        throw std::invalid_argument("sensor not configured with a core clock");
    const auto v_at = [&](double lookback_s) {
        const auto back =
            static_cast<std::ptrdiff_t>(lookback_s * clock_hz_);
        const std::ptrdiff_t last =
            static_cast<std::ptrdiff_t>(history.size()) - 1;
        const std::ptrdiff_t idx = last - back;
        return history[static_cast<std::size_t>(idx < 0 ? 0 : idx)];
    };
    return capture_impl(v_at, t_kelvin);
}

std::optional<int> DelayBlockSensor::decode(Snapshot snapshot) {
    bool bit[12];
    for (int j = 0; j < 12; ++j)
        bit[j] = ((snapshot.bits >> (11 - j)) & 1) != 0;

    int rising_sum = 0;
    int rising_count = 0;
    int transitions = 0;
    for (int j = 0; j < 11; ++j) {
        if (bit[j] != bit[j + 1])
            ++transitions;
        if (!bit[j] && bit[j + 1]) {
            rising_sum += j;
            ++rising_count;
        }
    }
    if (transitions == 0)
        return std::nullopt;

    // One clock edge pair per nibble at most.
    for (int n = 0; n < 3; ++n) {
        int rising = 0;
        int falling = 0;
        for (int p = 4 * n; p < 4 * n + 3; ++p) {
            if (!bit[p] && bit[p + 1])
                ++rising;
            if (bit[p] && !bit[p + 1])
                ++falling;
        }
        if (rising > 1 || falling > 1)
            return std::nullopt;
    }

    // Three periods stand in the line: exactly three rising edges.
    if (rising_count != 3)
        return std::nullopt;

    return 30 - rising_sum;
}

int DelayBlockSensor::read(double v, double t_kelvin) {
    if (auto d = decode(capture(v, t_kelvin)))
        return *d;
    ++decode_retries_;
    if (auto d = decode(capture(v, t_kelvin)))
        return *d;
    throw DecodeError("snapshot undecodable after retry");
}

int DelayBlockSensor::read(std::span<const double> history, double t_kelvin) {
    if (auto d = decode(capture(history, t_kelvin)))
        return *d;
    ++decode_retries_;
    if (auto d = decode(capture(history, t_kelvin)))
        return *d;
    throw DecodeError("snapshot undecodable after retry");
}

int DelayBlockSensor::calibrate(int n_probes, double ambient_sigma_v) {
    if (n_probes < 2)
        throw std::invalid_argument("calibrate needs at least two probes");

    const int saved = t_setting_;
    const bool saved_meta = metastability_;
    metastability_ = ambient_sigma_v > 0.0;

    int best_t = -1;
    double best_score = 0.0;
    for (int t = 0; t < 128; ++t) {
        t_setting_ = t;
        int diffs = 0;
        int decodable = 0;
        Snapshot prev{};
        for (int i = 0; i < n_probes; ++i) {
            const double v =
                cfg_.v_nominal + (ambient_sigma_v > 0.0
                                      ? ambient_sigma_v * rng_.gaussian()
                                      : 0.0);
            const Snapshot snap = capture(v, cfg_.t_nominal_kelvin);
            if (decode(snap))
                ++decodable;
            if (i > 0 && !(snap == prev))
                ++diffs;
            prev = snap;
        }
        const double instability =
            static_cast<double>(diffs) / static_cast<double>(n_probes - 1);
        instability_[t] = instability;
        const bool mostly_decodable = decodable * 10 >= n_probes * 9;
        if (mostly_decodable && instability > best_score) {
            best_score = instability;
            best_t = t;
        }
    }

    metastability_ = saved_meta;
    if (best_t < 0 || best_score <= 0.0) {
        t_setting_ = saved;
        throw CalibrationError("no delay setting shows capture instability");
    }
    t_setting_ = best_t;
    return best_t;
}

double DelayBlockSensor::min_edge_distance_slots(int t_setting) const {
    const double period = cfg_.clk_period_s;
    const double base = cfg_.base_delay(t_setting);
    double tau = cfg_.route_delay_periods * period;
    double min_dist = 1.0;
    for (int j = 0; j < 12; ++j) {
        const double d = base * cfg_.element_mismatch[j];
        tau += d;
        const double x = frac(-tau / period);
        const double dist = std::min(std::abs(x - 0.5), std::min(x, 1.0 - x));
        min_dist = std::min(min_dist, dist / (d / period));
    }
    return min_dist;
}

} // namespace dlsca
