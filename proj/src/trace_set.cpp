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

#include "dlsca/trace_set.hpp"

#include <cstring>

#include "dlsca/errors.hpp"

namespace dlsca {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'T', 'S'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::FILE *f, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v),
                                static_cast<unsigned char>(v >> 8)};
    std::fwrite(b, 1, 2, f);
}

void put_u32(std::FILE *f, std::uint32_t v) {
    const unsigned char b[4] = {
        static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    std::fwrite(b, 1, 4, f);
}

std::uint16_t get_u16(std::FILE *f, const std::string &path) {
    unsigned char b[2];
    if (std::fread(b, 1, 2, f) != 2)
        throw IoError("truncated trace-set file: " + path);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::FILE *f, const std::string &path) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4)
        throw IoError("truncated trace-set file: " + path);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

double AcquisitionSet::retained_fraction() const {
    if (retained.empty())
        return 0.0;
    std::size_t kept = 0;
    for (auto r : retained)
        kept += r ? 1 : 0;
    return static_cast<double>(kept) / static_cast<double>(retained.size());
}

SltsWriter::SltsWriter(const std::filesystem::path &path,
                       std::uint32_t n_traces, std::uint32_t n_samples,
                       std::uint8_t sensor_kind)
    : path_(path.string()), expected_traces_(n_traces),
      expected_samples_(n_samples) {
    file_ = std::fopen(path_.c_str(), "wb");
    if (!file_)
        throw IoError("cannot open trace-set file for writing: " + path_);
    std::fwrite(kMagic, 1, 4, file_);
    put_u16(file_, kVersion);
    put_u32(file_, n_traces);
    put_u32(file_, n_samples);
    const unsigned char lens[3] = {16, 16, sensor_kind};
    std::fwrite(lens, 1, 3, file_);
}

SltsWriter::~SltsWriter() { close(); }

void SltsWriter::close() {
    if (file_) {
        std::fclose(file_);
        file_ = nullptr;
    }
}

void SltsWriter::write_trace(const aes::Block &pt, const aes::Block &ct,
                             std::uint32_t cycle_count, bool retained,
                             std::span<const std::int32_t> samples) {
    if (!file_)
        throw IoError("trace-set writer already closed: " + path_);
    if (samples.size() != expected_samples_ || written_ >= expected_traces_)
        throw IoError("trace-set writer shape mismatch: " + path_);
    std::fwrite(pt.bytes.data(), 1, 16, file_);
    std::fwrite(ct.bytes.data(), 1, 16, file_);
    put_u32(file_, cycle_count);
    const unsigned char r = retained ? 1 : 0;
    std::fwrite(&r, 1, 1, file_);
    for (const std::int32_t s : samples)
        put_u32(file_, static_cast<std::uint32_t>(s));
    ++written_;
}

void write_slts(const std::filesystem::path &path, const AcquisitionSet &set) {
    SltsWriter writer(path, static_cast<std::uint32_t>(set.size()),
                      set.n_samples, set.sensor_kind);
    for (std::size_t i = 0; i < set.size(); ++i) {
        aes::Block pt, ct;
        pt.bytes = set.plaintexts[i];
        ct.bytes = set.ciphertexts[i];
        writer.write_trace(pt, ct, set.cycle_counts[i], set.retained[i] != 0,
                           set.trace(i));
    }
}

AcquisitionSet read_slts(const std::filesystem::path &path) {
    const std::string p = path.string();
    std::FILE *f = std::fopen(p.c_str(), "rb");
    if (!f)
        throw IoError("cannot open trace-set file: " + p);

    AcquisitionSet set;
    try {
        char magic[4];
        if (std::fread(magic, 1, 4, f) != 4 ||
            std::memcmp(magic, kMagic, 4) != 0)
            throw IoError("not a trace-set file: " + p);
        if (get_u16(f, p) != kVersion)
            throw IoError("unsupported trace-set version: " + p);
        const std::uint32_t n_traces = get_u32(f, p);
        set.n_samples = get_u32(f, p);
        unsigned char lens[3];
        if (std::fread(lens, 1, 3, f) != 3 || lens[0] != 16 || lens[1] != 16)
            throw IoError("unsupported text lengths in trace-set: " + p);
        set.sensor_kind = lens[2];

        set.plaintexts.resize(n_traces);
        set.ciphertexts.resize(n_traces);
        set.cycle_counts.resize(n_traces);
        set.retained.resize(n_traces);
        set.samples.resize(static_cast<std::size_t>(n_traces) * set.n_samples);
        for (std::uint32_t i = 0; i < n_traces; ++i) {
            if (std::fread(set.plaintexts[i].data(), 1, 16, f) != 16 ||
                std::fread(set.ciphertexts[i].data(), 1, 16, f) != 16)
                throw IoError("truncated trace-set file: " + p);
            set.cycle_counts[i] = get_u32(f, p);
            unsigned char r;
            if (std::fread(&r, 1, 1, f) != 1)
                throw IoError("truncated trace-set file: " + p);
            set.retained[i] = r;
            for (std::uint32_t s = 0; s < set.n_samples; ++s)
                set.samples[static_cast<std::size_t>(i) * set.n_samples + s] =
                    static_cast<std::int32_t>(get_u32(f, p));
        }
    } catch (...) {
        std::fclose(f);
        throw;
    }
    std::fclose(f);
    return set;
}

} // namespace dlsca
