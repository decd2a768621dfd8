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
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dlsca/aes_ttable.hpp"

namespace dlsca {

/// Aligned traces plus the texts that produced them.
struct AcquisitionSet {
    std::vector<std::array<std::uint8_t, 16>> plaintexts;
    std::vector<std::array<std::uint8_t, 16>> ciphertexts;
    std::vector<std::int32_t> samples; // n_traces x n_samples, row-major
    std::vector<std::uint32_t> cycle_counts;
    std::vector<std::uint8_t> retained;
    std::uint32_t n_samples = 0;
    std::uint8_t sensor_kind = 0;

    std::size_t size() const { return plaintexts.size(); }
    std::span<const std::int32_t> trace(std::size_t i) const {
        return {samples.data() + i * n_samples, n_samples};
    }
    double retained_fraction() const;
};

/*
 * Trace-set file, little-endian:
 *   magic "SLTS", u16 version=1, u32 n_traces, u32 n_samples,
 *   u8 pt_len=16, u8 ct_len=16, u8 sensor_kind,
 *   then per trace: pt, ct, u32 cycle_count, u8 retained,
 *   n_samples x i32 samples.
 */
class SltsWriter {
  public:
    SltsWriter(const std::filesystem::path &path, std::uint32_t n_traces,
               std::uint32_t n_samples, std::uint8_t sensor_kind);
    ~SltsWriter();
    SltsWriter(const SltsWriter &) = delete;
    SltsWriter &operator=(const SltsWriter &) = delete;

    void write_trace(const aes::Block &pt, const aes::Block &ct,
                     std::uint32_t cycle_count, bool retained,
                     std::span<const std::int32_t> samples);
    void close();

  private:
    std::FILE *file_ = nullptr;
    std::string path_;
    std::uint32_t expected_traces_;
    std::uint32_t expected_samples_;
    std::uint32_t written_ = 0;
};

void write_slts(const std::filesystem::path &path, const AcquisitionSet &set);
AcquisitionSet read_slts(const std::filesystem::path &path);

} // namespace dlsca
