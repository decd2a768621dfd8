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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dlsca/scenario.hpp"

namespace dlsca {

/// Columns: sample_index, mean_value.
void write_averaged_csv(const std::filesystem::path &path,
                        std::span<const double> averaged);

/// Columns: sample_index, byte, rho_correct, rho_best_wrong. Requires the
/// outcome to carry its engine and the config a true key.
void write_rho_time_csv(const std::filesystem::path &path,
                        const ScenarioConfig &config,
                        const AttackOutcome &outcome);

/// Columns: trace_count, byte, rho_correct, rho_best_wrong; rows ordered by
/// trace_count.
void write_progressive_csv(const std::filesystem::path &path,
                           const ScenarioConfig &config,
                           const KeyRecoveryReport &report);

void write_report_txt(const std::filesystem::path &path,
                      const ScenarioConfig &config,
                      const AttackOutcome &outcome);

void write_config_echo(const std::filesystem::path &path,
                       const ScenarioConfig &config);

/// Minimal polyline rendering of one series.
void write_svg_curve(const std::filesystem::path &path,
                     std::span<const double> series, const std::string &title);

/// Columns: time_s, average_value (block-averaged sensor trace).
void write_sensor_trace_csv(const std::filesystem::path &path,
                            const SensorTrace &trace);

std::string key_to_hex(const aes::AesKey &key);
aes::AesKey key_from_hex(const std::string &hex);

} // namespace dlsca
