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

// Byte-oriented textbook AES-128 used as an independent oracle: its own
// S-box derived from GF(2^8) inversion plus the affine map, byte-matrix
// state, explicit ShiftRows/MixColumns. Shares nothing with the table-based
// implementation under test.
namespace refaes {

std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b);
std::uint8_t sbox(std::uint8_t x); // computed, not tabulated from literals

using Bytes16 = std::array<std::uint8_t, 16>;

/// 11 round keys of 16 bytes each, byte-ordered as in the standard.
std::array<Bytes16, 11> expand_key(const Bytes16 &key);

Bytes16 encrypt(const Bytes16 &key, const Bytes16 &pt);

} // namespace refaes
