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

#include <stdexcept>
#include <string>

namespace dlsca {

/// Invalid or inconsistent configuration (maps to CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

/// The HPC filter retained less than 1% of acquisitions.
struct StarvationError : std::runtime_error {
    explicit StarvationError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Delay-block calibration found no unstable setting.
struct CalibrationError : std::runtime_error {
    explicit CalibrationError(const std::string &msg) : std::runtime_error(msg) {}
};

/// A snapshot failed to decode twice in a row.
struct DecodeError : std::runtime_error {
    explicit DecodeError(const std::string &msg) : std::runtime_error(msg) {}
};

/// File I/O failure, annotated with the path.
struct IoError : std::runtime_error {
    explicit IoError(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace dlsca
