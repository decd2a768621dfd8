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

#include "dlsca/aes_ttable.hpp"

namespace dlsca::aes {

namespace {

constexpr std::array<std::uint8_t, 256> kSbox = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b,
    0xfe, 0xd7, 0xab, 0x76, 0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0,
    0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0, 0xb7, 0xfd, 0x93, 0x26,
    0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2,
    0xeb, 0x27, 0xb2, 0x75, 0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0,
    0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84, 0x53, 0xd1, 0x00, 0xed,
    0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f,
    0x50, 0x3c, 0x9f, 0xa8, 0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5,
    0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2, 0xcd, 0x0c, 0x13, 0xec,
    0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14,
    0xde, 0x5e, 0x0b, 0xdb, 0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c,
    0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79, 0xe7, 0xc8, 0x37, 0x6d,
    0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f,
    0x4b, 0xbd, 0x8b, 0x8a, 0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e,
    0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e, 0xe1, 0xf8, 0x98, 0x11,
    0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f,
    0xb0, 0x54, 0xbb, 0x16};

constexpr std::uint8_t xtime(std::uint8_t x) {
    return static_cast<std::uint8_t>((x << 1) ^ ((x >> 7) * 0x1b));
}

constexpr std::uint32_t rotr8(std::uint32_t w) { return (w >> 8) | (w << 24); }

constexpr std::array<std::uint32_t, 10> kRcon = {
    0x01000000, 0x02000000, 0x04000000, 0x08000000, 0x10000000,
    0x20000000, 0x40000000, 0x80000000, 0x1b000000, 0x36000000};

std::uint32_t sub_word(std::uint32_t w) {
    return (std::uint32_t(kSbox[(w >> 24) & 0xff]) << 24) |
           (std::uint32_t(kSbox[(w >> 16) & 0xff]) << 16) |
           (std::uint32_t(kSbox[(w >> 8) & 0xff]) << 8) |
           std::uint32_t(kSbox[w & 0xff]);
}

std::uint32_t rot_word(std::uint32_t w) { return (w << 8) | (w >> 24); }

std::uint32_t load_be32(const std::uint8_t *p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void store_be32(std::uint8_t *p, std::uint32_t w) {
    p[0] = static_cast<std::uint8_t>(w >> 24);
    p[1] = static_cast<std::uint8_t>(w >> 16);
    p[2] = static_cast<std::uint8_t>(w >> 8);
    p[3] = static_cast<std::uint8_t>(w);
}

} // namespace

const std::array<std::uint8_t, 256> &sbox() { return kSbox; }

TTableSet::TTableSet() {
    for (int x = 0; x < 256; ++x) {
        const std::uint8_t s = kSbox[x];
        const std::uint8_t s2 = xtime(s);
        const std::uint8_t s3 = static_cast<std::uint8_t>(s2 ^ s);
        std::uint32_t w = (std::uint32_t(s2) << 24) | (std::uint32_t(s) << 16) |
                          (std::uint32_t(s) << 8) | std::uint32_t(s3);
        for (int k = 0; k < 4; ++k) {
            tables_[k][x] = w;
            w = rotr8(w);
        }
    }
}

const TTableSet &TTableSet::instance() {
    static const TTableSet set;
    return set;
}

RoundKeys key_expand(const AesKey &key) {
    RoundKeys rk;
    for (int i = 0; i < 4; ++i)
        rk.words[i] = load_be32(&key.bytes[4 * i]);
    for (int i = 4; i < 44; ++i) {
        std::uint32_t temp = rk.words[i - 1];
        if (i % 4 == 0)
            temp = sub_word(rot_word(temp)) ^ kRcon[i / 4 - 1];
        rk.words[i] = rk.words[i - 4] ^ temp;
    }
    return rk;
}

Block encrypt(const RoundKeys &keys, const Block &pt) {
    const TTableSet &tt = TTableSet::instance();
    const auto &t0 = tt.table(0);
    const auto &t1 = tt.table(1);
    const auto &t2 = tt.table(2);
    const auto &t3 = tt.table(3);

    std::uint32_t s0 = load_be32(&pt.bytes[0]) ^ keys.words[0];
    std::uint32_t s1 = load_be32(&pt.bytes[4]) ^ keys.words[1];
    std::uint32_t s2 = load_be32(&pt.bytes[8]) ^ keys.words[2];
    std::uint32_t s3 = load_be32(&pt.bytes[12]) ^ keys.words[3];

    for (int round = 1; round < 10; ++round) {
        const std::uint32_t *rk = &keys.words[4 * round];
        const std::uint32_t u0 = t0[s0 >> 24] ^ t1[(s1 >> 16) & 0xff] ^
                                 t2[(s2 >> 8) & 0xff] ^ t3[s3 & 0xff] ^ rk[0];
        const std::uint32_t u1 = t0[s1 >> 24] ^ t1[(s2 >> 16) & 0xff] ^
                                 t2[(s3 >> 8) & 0xff] ^ t3[s0 & 0xff] ^ rk[1];
        const std::uint32_t u2 = t0[s2 >> 24] ^ t1[(s3 >> 16) & 0xff] ^
                                 t2[(s0 >> 8) & 0xff] ^ t3[s1 & 0xff] ^ rk[2];
        const std::uint32_t u3 = t0[s3 >> 24] ^ t1[(s0 >> 16) & 0xff] ^
                                 t2[(s1 >> 8) & 0xff] ^ t3[s2 & 0xff] ^ rk[3];
        s0 = u0;
        s1 = u1;
        s2 = u2;
        s3 = u3;
    }

    // Last round: SubBytes + ShiftRows only.
    const std::uint32_t *rk = &keys.words[40];
    const std::uint32_t u0 =
        ((std::uint32_t(kSbox[s0 >> 24]) << 24) |
         (std::uint32_t(kSbox[(s1 >> 16) & 0xff]) << 16) |
         (std::uint32_t(kSbox[(s2 >> 8) & 0xff]) << 8) |
         std::uint32_t(kSbox[s3 & 0xff])) ^
        rk[0];
    const std::uint32_t u1 =
        ((std::uint32_t(kSbox[s1 >> 24]) << 24) |
         (std::uint32_t(kSbox[(s2 >> 16) & 0xff]) << 16) |
         (std::uint32_t(kSbox[(s3 >> 8) & 0xff]) << 8) |
         std::uint32_t(kSbox[s0 & 0xff])) ^
        rk[1];
    const std::uint32_t u2 =
        ((std::uint32_t(kSbox[s2 >> 24]) << 24) |
         (std::uint32_t(kSbox[(s3 >> 16) & 0xff]) << 16) |
         (std::uint32_t(kSbox[(s0 >> 8) & 0xff]) << 8) |
         std::uint32_t(kSbox[s1 & 0xff])) ^
        rk[2];
    const std::uint32_t u3 =
        ((std::uint32_t(kSbox[s3 >> 24]) << 24) |
         (std::uint32_t(kSbox[(s0 >> 16) & 0xff]) << 16) |
         (std::uint32_t(kSbox[(s1 >> 8) & 0xff]) << 8) |
         std::uint32_t(kSbox[s2 & 0xff])) ^
        rk[3];

    Block ct;
    store_be32(&ct.bytes[0], u0);
    store_be32(&ct.bytes[4], u1);
    store_be32(&ct.bytes[8], u2);
    store_be32(&ct.bytes[12], u3);
    return ct;
}

std::array<std::uint32_t, 16> first_round_ttable_words(const RoundKeys &keys,
                                                       const Block &pt) {
    const TTableSet &tt = TTableSet::instance();
    std::array<std::uint32_t, 16> words{};
    for (int i = 0; i < 16; ++i) {
        const std::uint8_t x =
            static_cast<std::uint8_t>(pt.bytes[i] ^ keys.round0_byte(i));
        words[i] = tt.t(i % 4, x);
    }
    return words;
}

} // namespace dlsca::aes
