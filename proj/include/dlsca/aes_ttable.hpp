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

namespace dlsca::aes {

struct AesKey {
    std::array<std::uint8_t, 16> bytes{};
    bool operator==(const AesKey &) const = default;
};

struct Block {
    std::array<std::uint8_t, 16> bytes{};
    bool operator==(const Block &) const = default;
};

/// 44 round-key words, big-endian packed (word = b0<<24 | b1<<16 | b2<<8 | b3).
struct RoundKeys {
    std::array<std::uint32_t, 44> words{};
    /// Byte i of round key 0, i.e. the key byte XORed into state byte i.
    std::uint8_t round0_byte(int i) const {
        return static_cast<std::uint8_t>(words[i / 4] >> (24 - 8 * (i % 4)));
    }
};

const std::array<std::uint8_t, 256> &sbox();

/// The four round tables. t(0,x) packs {2*S[x], S[x], S[x], 3*S[x]} MSB-first;
/// t(1..3) are successive 8-bit right rotations of t(0). Generated from the
/// S-box at first use and checked by the test suite against the packing rule.
class TTableSet {
  public:
    static const TTableSet &instance();
    std::uint32_t t(int which, std::uint8_t x) const { return tables_[which][x]; }
    const std::array<std::uint32_t, 256> &table(int which) const {
        return tables_[which];
    }

  private:
    TTableSet();
    std::array<std::array<std::uint32_t, 256>, 4> tables_{};
};

RoundKeys key_expand(const AesKey &key);

Block encrypt(const RoundKeys &keys, const Block &pt);

/// For each state byte i, the 32-bit word T[i mod 4](pt[i] ^ k0[i]) looked up
/// in the first round. Index i follows the state layout, not the computation
/// order; the computation order is 0 5 10 15 / 4 9 14 3 / 8 13 2 7 / 12 1 6 11.
std::array<std::uint32_t, 16> first_round_ttable_words(const RoundKeys &keys,
                                                       const Block &pt);

} // namespace dlsca::aes
