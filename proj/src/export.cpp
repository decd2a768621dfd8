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

#include "dlsca/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dlsca/errors.hpp"

namespace dlsca {

namespace {

std::ofstream open_out(const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open output file: " + path.string());
    return out;
}

} // namespace

std::string key_to_hex(const aes::AesKey &key) {
    static const char *digits = "0123456789abcdef";
    std::string hex;
    hex.reserve(32);
    for (auto b : key.bytes) {
        hex.push_back(digits[b >> 4]);
        hex.push_back(digits[b & 0xf]);
    }
    return hex;
}

aes::AesKey key_from_hex(const std::string &hex) {
    if (hex.size() != 32)
        throw ConfigError("key must be 32 hex digits");
    aes::AesKey key;
    for (int i = 0; i < 16; ++i) {
        const auto nibble = [&](char c) -> int {
            if (c >= '0' && c <= '9')
                return c - '0';
            if (c >= 'a' && c <= 'f')
                return c - 'a' + 10;
            if (c >= 'A' && c <= 'F')
                return c - 'A' + 10;
            throw ConfigError("invalid hex digit in key");
        };
        key.bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
            (nibble(hex[static_cast<std::size_t>(2 * i)]) << 4) |
            nibble(hex[static_cast<std::size_t>(2 * i + 1)]));
    }
    return key;
}

void write_averaged_csv(const std::filesystem::path &path,
                        std::span<const double> averaged) {
    auto out = open_out(path);
    out << "sample_index,mean_value\n";
    char line[64];
    for (std::size_t i = 0; i < averaged.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.9g\n", i, averaged[i]);
        out << line;
    }
}

void write_rho_time_csv(const std::filesystem::path &path,
                        const ScenarioConfig &config,
                        const AttackOutcome &outcome) {
    auto out = open_out(path);
    out << "sample_index,byte,rho_correct,rho_best_wrong\n";
    if (!outcome.engine || !config.true_key)
        return;
    const CpaEngine &eng = *outcome.engine;
    char line[96];
    for (int byte = 0; byte < 16; ++byte) {
        const int truth = config.true_key->bytes[static_cast<std::size_t>(byte)];
        // Best wrong hypothesis by overall score.
        int wrong = truth == 0 ? 1 : 0;
        double wrong_best = -1.0;
        for (int k = 0; k < 256; ++k) {
            if (k == truth)
                continue;
            double m = 0.0;
            for (int s = 0; s < eng.n_samples(); ++s)
                m = std::max(m, std::abs(eng.correlation(byte, k, s)));
            if (m > wrong_best) {
                wrong_best = m;
                wrong = k;
            }
        }
        for (int s = 0; s < eng.n_samples(); ++s) {
            std::snprintf(line, sizeof line, "%d,%d,%.9g,%.9g\n", s, byte,
                          std::abs(eng.correlation(byte, truth, s)),
                          std::abs(eng.correlation(byte, wrong, s)));
            out << line;
        }
    }
}

void write_progressive_csv(const std::filesystem::path &path,
                           const ScenarioConfig &config,
                           const KeyRecoveryReport &report) {
    auto out = open_out(path);
    out << "trace_count,byte,rho_correct,rho_best_wrong\n";
    if (!config.true_key)
        return;
    char line[96];
    for (const auto &cp : report.progressive) {
        for (int byte = 0; byte < 16; ++byte) {
            const int truth =
                config.true_key->bytes[static_cast<std::size_t>(byte)];
            const auto &scores = cp.scores[static_cast<std::size_t>(byte)];
            float wrong = 0.0f;
            for (int k = 0; k < 256; ++k)
                if (k != truth)
                    wrong = std::max(wrong, scores[static_cast<std::size_t>(k)]);
            std::snprintf(line, sizeof line, "%llu,%d,%.9g,%.9g\n",
                          static_cast<unsigned long long>(cp.n_traces), byte,
                          static_cast<double>(
                              scores[static_cast<std::size_t>(truth)]),
                          static_cast<double>(wrong));
            out << line;
        }
    }
}

void write_report_txt(const std::filesystem::path &path,
                      const ScenarioConfig &config,
                      const AttackOutcome &outcome) {
    auto out = open_out(path);
    const KeyRecoveryReport &rep = outcome.report;

    out << "delay-line power side-channel attack report\n";
    out << "scenario: " << to_string(config.scenario)
        << "  sensor: " << to_string(config.sensor) << "\n";
    out << "traces: " << config.n_acq << "  retained: " << outcome.n_retained;
    char buf[128];
    std::snprintf(buf, sizeof buf, " (%.1f%%)\n",
                  100.0 * outcome.retained_fraction);
    out << buf;
    out << "hpc threshold: " << outcome.hpc.threshold() << " cycles (min "
        << outcome.hpc.min_reference_cycles << " + margin "
        << outcome.hpc.margin_cycles << ")\n";
    out << "in-window samples: " << outcome.in_window_samples << "\n";
    if (outcome.delay_block_setting >= 0)
        out << "delay-block setting: " << outcome.delay_block_setting << "\n";
    out << "recovered key: " << key_to_hex(rep.best_key) << "\n";
    if (config.true_key)
        out << "rank-1 bytes: " << rep.rank_one_count() << "/16\n";
    out << "hypothesis mapping: state byte i is predicted through round "
           "table T[i mod 4]\n";
    std::snprintf(buf, sizeof buf, "elapsed: %.1f s\n",
                  outcome.elapsed_seconds);
    out << buf;
    out << "\nbyte  best  rho_max   sample";
    if (config.true_key)
        out << "  rank  rho_correct";
    out << "\n";
    for (int i = 0; i < 16; ++i) {
        const ByteResult &b = rep.bytes[static_cast<std::size_t>(i)];
        std::snprintf(buf, sizeof buf, "%4d  0x%02x  %8.5f  %6d", i,
                      b.best_hyp, b.rho_max, b.argmax_sample);
        out << buf;
        if (b.rank) {
            std::snprintf(buf, sizeof buf, "  %4d  %11.5f", *b.rank,
                          b.rho_correct);
            out << buf;
        }
        out << "\n";
    }
}

void write_config_echo(const std::filesystem::path &path,
                       const ScenarioConfig &config) {
    auto out = open_out(path);
    out << config.to_json_text();
}

void write_svg_curve(const std::filesystem::path &path,
                     std::span<const double> series,
                     const std::string &title) {
    auto out = open_out(path);
    const double w = 640.0, h = 360.0, pad = 24.0;
    double lo = series.empty() ? 0.0 : series[0];
    double hi = lo;
    for (double v : series) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi <= lo)
        hi = lo + 1.0;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
        << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << pad << "\" y=\"16\" font-size=\"12\">" << title
        << "</text>\n";
    out << "<polyline fill=\"none\" stroke=\"#c33\" stroke-width=\"1\" "
           "points=\"";
    char pt[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double x =
            pad + (w - 2 * pad) * (series.size() > 1
                                       ? static_cast<double>(i) /
                                             static_cast<double>(series.size() - 1)
                                       : 0.0);
        const double y = h - pad - (h - 2 * pad) * (series[i] - lo) / (hi - lo);
        std::snprintf(pt, sizeof pt, "%.1f,%.1f ", x, y);
        out << pt;
    }
    out << "\"/>\n</svg>\n";
}

void write_sensor_trace_csv(const std::filesystem::path &path,
                            const SensorTrace &trace) {
    auto out = open_out(path);
    out << "time_s,average_value\n";
    char line[64];
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const double t = trace.rate_hz > 0.0
                             ? static_cast<double>(i) / trace.rate_hz
                             : static_cast<double>(i);
        const double v = static_cast<double>(trace.samples[i]) /
                         static_cast<double>(trace.average_block);
        std::snprintf(line, sizeof line, "%.6f,%.6f\n", t, v);
        out << line;
    }
}

} // namespace dlsca
