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

#include "dlsca/cpa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace dlsca {

int KeyRecoveryReport::rank_one_count() const {
    int count = 0;
    for (const auto &b : bytes)
        if (b.rank && *b.rank == 1)
            ++count;
    return count;
}

int CpaEngine::predict(LeakModel model, int byte_index, std::uint8_t pt_byte,
                       std::uint8_t key_guess) {
    const auto x = static_cast<std::uint8_t>(pt_byte ^ key_guess);
    if (model == LeakModel::SboxByte)
        return std::popcount(static_cast<unsigned>(aes::sbox()[x]));
    return std::popcount(aes::TTableSet::instance().t(byte_index % 4, x));
}

CpaEngine::CpaEngine(int n_samples, LeakModel model,
                     std::vector<std::uint64_t> checkpoints)
    : n_samples_(n_samples), model_(model),
      pending_checkpoints_(std::move(checkpoints)) {
    if (n_samples_ < 1)
        throw std::invalid_argument("n_samples must be at least 1");
    sum_x_.assign(static_cast<std::size_t>(n_samples_), 0.0);
    sum_xx_.assign(static_cast<std::size_t>(n_samples_), 0.0);
    sum_y_.assign(16 * 256, 0.0);
    sum_yy_.assign(16 * 256, 0.0);
    sum_xy_.assign(static_cast<std::size_t>(16 * 256) * n_samples_, 0.0);
    for (int table = 0; table < 4; ++table)
        for (int x = 0; x < 256; ++x)
            hyp_table_[table][x] =
                model_ == LeakModel::SboxByte
                    ? std::popcount(static_cast<unsigned>(
                          aes::sbox()[static_cast<std::uint8_t>(x)]))
                    : std::popcount(aes::TTableSet::instance().t(
                          table, static_cast<std::uint8_t>(x)));
    std::sort(pending_checkpoints_.begin(), pending_checkpoints_.end());
}

void CpaEngine::update(const aes::Block &pt, std::span<const double> trace) {
    if (static_cast<int>(trace.size()) != n_samples_)
        throw std::invalid_argument("trace length mismatch");

    const std::size_t S = static_cast<std::size_t>(n_samples_);
    const double *x = trace.data();
    for (std::size_t s = 0; s < S; ++s) {
        sum_x_[s] += x[s];
        sum_xx_[s] += x[s] * x[s];
    }

    for (int byte = 0; byte < 16; ++byte) {
        const auto &hw = hyp_table_[byte % 4];
        const std::uint8_t p = pt.bytes[byte];
        double *sy = &sum_y_[static_cast<std::size_t>(byte) * 256];
        double *syy = &sum_yy_[static_cast<std::size_t>(byte) * 256];
        double *sxy = &sum_xy_[static_cast<std::size_t>(byte) * 256 * S];
        for (int k = 0; k < 256; ++k) {
            const double y = hw[static_cast<std::uint8_t>(p ^ k)];
            sy[k] += y;
            syy[k] += y * y;
            double *cell = sxy + static_cast<std::size_t>(k) * S;
            for (std::size_t s = 0; s < S; ++s)
                cell[s] += y * x[s];
        }
    }

    ++n_;
    if (!pending_checkpoints_.empty() && n_ == pending_checkpoints_.front())
        snapshot_checkpoint();
}

void CpaEngine::snapshot_checkpoint() {
    KeyRecoveryReport::Checkpoint cp;
    cp.n_traces = n_;
    cp.scores = scores();
    checkpoints_.push_back(std::move(cp));
    pending_checkpoints_.erase(pending_checkpoints_.begin());
}

double CpaEngine::correlation(int byte, int hyp, int sample) const {
    if (n_ < 2)
        return 0.0;
    const std::size_t S = static_cast<std::size_t>(n_samples_);
    const std::size_t cell = static_cast<std::size_t>(byte) * 256 + hyp;
    const double n = static_cast<double>(n_);
    const double sx = sum_x_[static_cast<std::size_t>(sample)];
    const double sxx = sum_xx_[static_cast<std::size_t>(sample)];
    const double sy = sum_y_[cell];
    const double syy = sum_yy_[cell];
    const double sxy = sum_xy_[cell * S + static_cast<std::size_t>(sample)];
    const double var_x = n * sxx - sx * sx;
    const double var_y = n * syy - sy * sy;
    if (var_x <= 0.0 || var_y <= 0.0)
        return 0.0;
    return (n * sxy - sx * sy) / std::sqrt(var_x * var_y);
}

std::array<std::array<float, 256>, 16> CpaEngine::scores() const {
    std::array<std::array<float, 256>, 16> out{};
    if (n_ < 2)
        return out;
    const std::size_t S = static_cast<std::size_t>(n_samples_);
    const double n = static_cast<double>(n_);
    for (int byte = 0; byte < 16; ++byte) {
        for (int k = 0; k < 256; ++k) {
            const std::size_t cell = static_cast<std::size_t>(byte) * 256 + k;
            const double sy = sum_y_[cell];
            const double var_y = n * sum_yy_[cell] - sy * sy;
            double best = 0.0;
            if (var_y > 0.0) {
                const double *sxy = &sum_xy_[cell * S];
                for (std::size_t s = 0; s < S; ++s) {
                    const double var_x =
                        n * sum_xx_[s] - sum_x_[s] * sum_x_[s];
                    if (var_x <= 0.0)
                        continue;
                    const double rho = (n * sxy[s] - sum_x_[s] * sy) /
                                       std::sqrt(var_x * var_y);
                    best = std::max(best, std::abs(rho));
                }
            }
            out[byte][k] = static_cast<float>(best);
        }
    }
    return out;
}

std::vector<double> CpaEngine::rho_vs_time(int byte, int hyp) const {
    std::vector<double> out(static_cast<std::size_t>(n_samples_), 0.0);
    for (int s = 0; s < n_samples_; ++s)
        out[static_cast<std::size_t>(s)] = std::abs(correlation(byte, hyp, s));
    return out;
}

KeyRecoveryReport
CpaEngine::report(const std::optional<aes::AesKey> &true_key) const {
    if (n_ < 2)
        throw std::runtime_error("no ranking yet: need at least two traces");

    KeyRecoveryReport rep;
    rep.n_traces = n_;
    rep.progressive = checkpoints_;

    for (int byte = 0; byte < 16; ++byte) {
        // Scores with argmax samples; ties break toward the lower hypothesis.
        double best_score = -1.0;
        int best_hyp = 0;
        int best_sample = 0;
        std::array<double, 256> score{};
        for (int k = 0; k < 256; ++k) {
            double m = 0.0;
            int arg = 0;
            for (int s = 0; s < n_samples_; ++s) {
                const double a = std::abs(correlation(byte, k, s));
                if (a > m) {
                    m = a;
                    arg = s;
                }
            }
            score[static_cast<std::size_t>(k)] = m;
            if (m > best_score) {
                best_score = m;
                best_hyp = k;
                best_sample = arg;
            }
        }

        ByteResult &r = rep.bytes[static_cast<std::size_t>(byte)];
        r.best_hyp = best_hyp;
        r.rho_max = best_score;
        r.argmax_sample = best_sample;
        rep.best_key.bytes[static_cast<std::size_t>(byte)] =
            static_cast<std::uint8_t>(best_hyp);

        if (true_key) {
            const int truth = true_key->bytes[static_cast<std::size_t>(byte)];
            const double truth_score = score[static_cast<std::size_t>(truth)];
            int rank = 1;
            for (int k = 0; k < 256; ++k) {
                if (k == truth)
                    continue;
                if (score[static_cast<std::size_t>(k)] > truth_score ||
                    (score[static_cast<std::size_t>(k)] == truth_score &&
                     k < truth))
                    ++rank;
            }
            r.rank = rank;
            r.rho_correct = truth_score;
            int arg = 0;
            double m = -1.0;
            for (int s = 0; s < n_samples_; ++s) {
                const double a = std::abs(correlation(byte, truth, s));
                if (a > m) {
                    m = a;
                    arg = s;
                }
            }
            r.correct_argmax_sample = arg;
        }
    }
    return rep;
}

void CpaEngine::merge(const CpaEngine &other) {
    if (other.n_samples_ != n_samples_ || other.model_ != model_)
        throw std::invalid_argument("merging incompatible engines");
    n_ += other.n_;
    for (std::size_t i = 0; i < sum_x_.size(); ++i) {
        sum_x_[i] += other.sum_x_[i];
        sum_xx_[i] += other.sum_xx_[i];
    }
    for (std::size_t i = 0; i < sum_y_.size(); ++i) {
        sum_y_[i] += other.sum_y_[i];
        sum_yy_[i] += other.sum_yy_[i];
    }
    for (std::size_t i = 0; i < sum_xy_.size(); ++i)
        sum_xy_[i] += other.sum_xy_[i];
}

std::vector<double> CpaEngine::highpass(std::span<const double> trace,
                                        int window) {
    if (window < 1)
        throw std::invalid_argument("highpass window must be at least 1");
    if (static_cast<int>(trace.size()) < window)
        throw std::invalid_argument("trace shorter than highpass window");

    const int n = static_cast<int>(trace.size());
    const int half = window / 2;

    // Prefix sums make each truncated window O(1).
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i)
        prefix[static_cast<std::size_t>(i) + 1] =
            prefix[static_cast<std::size_t>(i)] + trace[static_cast<std::size_t>(i)];

    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        const double mean = (prefix[static_cast<std::size_t>(hi) + 1] -
                             prefix[static_cast<std::size_t>(lo)]) /
                            static_cast<double>(hi - lo + 1);
        out[static_cast<std::size_t>(i)] =
            trace[static_cast<std::size_t>(i)] - mean;
    }
    return out;
}

std::vector<double>
CpaEngine::average_traces(const std::vector<std::vector<double>> &traces,
                          std::size_t n) {
    if (n < 1 || traces.size() < n)
        throw std::invalid_argument("not enough traces to average");
    std::vector<double> out(traces[0].size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (traces[i].size() != out.size())
            throw std::invalid_argument("ragged trace lengths");
        for (std::size_t s = 0; s < out.size(); ++s)
            out[s] += traces[i][s];
    }
    for (auto &v : out)
        v /= static_cast<double>(n);
    return out;
}

} // namespace dlsca
