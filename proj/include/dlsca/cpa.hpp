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
#include <vector>

#include "dlsca/aes_ttable.hpp"

namespace dlsca {

/// Leakage hypothesis: Hamming weight of the 32-bit round-table word
/// (default) or of the 8-bit S-box output (for comparison experiments).
enum class LeakModel { TTableWord, SboxByte };

struct ByteResult {
    int best_hyp = 0;
    double rho_max = 0.0;
    int argmax_sample = 0;
    std::optional<int> rank;    // 1..256 when the true key is known
    double rho_correct = 0.0;   // max |rho| of the true hypothesis
    int correct_argmax_sample = 0;
};

struct KeyRecoveryReport {
    aes::AesKey best_key;
    std::array<ByteResult, 16> bytes;
    std::uint64_t n_traces = 0;

    struct Checkpoint {
        std::uint64_t n_traces = 0;
        // max-over-samples |rho| per (byte, hypothesis)
        std::array<std::array<float, 256>, 16> scores{};
    };
    std::vector<Checkpoint> progressive;

    int rank_one_count() const;
    bool full_rank_one() const { return rank_one_count() == 16; }
};

/// Streaming first-round correlation attack. Per (byte, hypothesis, sample)
/// cell the six sums n, Sx, Sxx, Sy, Syy, Sxy are accumulated in double
/// precision; sums shared between cells (the trace sums per sample, the
/// hypothesis sums per byte) are stored once, which leaves one Sxy array of
/// 16*256*n_samples doubles.
class CpaEngine {
  public:
    explicit CpaEngine(int n_samples, LeakModel model = LeakModel::TTableWord,
                       std::vector<std::uint64_t> checkpoints = {});

    void update(const aes::Block &pt, std::span<const double> trace);

    std::uint64_t trace_count() const { return n_; }
    int n_samples() const { return n_samples_; }

    /// Pearson correlation for one accumulator cell; 0 when a variance
    /// vanishes or fewer than two traces were seen.
    double correlation(int byte, int hyp, int sample) const;

    /// max over samples of |rho|, per (byte, hypothesis).
    std::array<std::array<float, 256>, 16> scores() const;

    /// |rho| of one hypothesis at every sample.
    std::vector<double> rho_vs_time(int byte, int hyp) const;

    /// Requires at least two traces.
    KeyRecoveryReport report(const std::optional<aes::AesKey> &true_key) const;

    /// Adds another engine's sums (same shape and model required).
    void merge(const CpaEngine &other);

    const std::vector<KeyRecoveryReport::Checkpoint> &checkpoints() const {
        return checkpoints_;
    }

    /// Sample minus the centered moving average of the surrounding window
    /// (clipped at the trace ends); removes drift slower than the window.
    static std::vector<double> highpass(std::span<const double> trace,
                                        int window);

    /// Element-wise mean of the first n traces.
    static std::vector<double>
    average_traces(const std::vector<std::vector<double>> &traces,
                   std::size_t n);

    /// Hypothesis value for a plaintext byte under a key guess.
    static int predict(LeakModel model, int byte_index, std::uint8_t pt_byte,
                       std::uint8_t key_guess);

  private:
    void snapshot_checkpoint();

    int n_samples_;
    LeakModel model_;
    std::uint64_t n_ = 0;
    std::vector<double> sum_x_;   // [S]
    std::vector<double> sum_xx_;  // [S]
    std::vector<double> sum_y_;   // [16*256]
    std::vector<double> sum_yy_;  // [16*256]
    std::vector<double> sum_xy_;  // [16*256*S]
    std::array<std::array<double, 256>, 4> hyp_table_{}; // HW per table input
    std::vector<std::uint64_t> pending_checkpoints_;
    std::vector<KeyRecoveryReport::Checkpoint> checkpoints_;
};

} // namespace dlsca
