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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dlsca/aes_ttable.hpp"
#include "dlsca/rng.hpp"
#include "reference_aes.hpp"

using namespace dlsca;

namespace {

aes::Block random_block(Rng &rng) {
    aes::Block b;
    for (auto &x : b.bytes)
        x = static_cast<std::uint8_t>(rng.next_u64() & 0xff);
    return b;
}

aes::AesKey random_key(Rng &rng) {
    aes::AesKey k;
    for (auto &x : k.bytes)
        x = static_cast<std::uint8_t>(rng.next_u64() & 0xff);
    return k;
}

const aes::AesKey kSequentialKey{{0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06,
                                  0x07, 0x08, 0x09, 0x0a, 0x0b, 0x0c, 0x0d,
                                  0x0e, 0x0f}};

} // namespace

TEST_CASE("sbox matches the field-arithmetic construction") {
    for (int x = 0; x < 256; ++x)
        CHECK(aes::sbox()[static_cast<std::size_t>(x)] ==
              refaes::sbox(static_cast<std::uint8_t>(x)));
}

TEST_CASE("round tables pack {2S, S, S, 3S} and rotate") {
    const auto &tt = aes::TTableSet::instance();
    for (int x = 0; x < 256; ++x) {
        const auto xb = static_cast<std::uint8_t>(x);
        const std::uint8_t s = refaes::sbox(xb);
        const std::uint32_t expected =
            (static_cast<std::uint32_t>(refaes::gf_mul(s, 2)) << 24) |
            (static_cast<std::uint32_t>(s) << 16) |
            (static_cast<std::uint32_t>(s) << 8) |
            static_cast<std::uint32_t>(refaes::gf_mul(s, 3));
        CHECK(tt.t(0, xb) == expected);
        for (int k = 1; k < 4; ++k) {
            const std::uint32_t prev = tt.t(k - 1, xb);
            CHECK(tt.t(k, xb) == ((prev >> 8) | (prev << 24)));
        }
    }
    CHECK(tt.t(0, 0) == 0xC66363A5u);
}

TEST_CASE("key schedule fixed points") {
    SUBCASE("all-zero key") {
        const auto rk = aes::key_expand(aes::AesKey{});
        CHECK(rk.words[4] == 0x62636363u);
    }
    SUBCASE("first round key equals the key") {
        const auto rk = aes::key_expand(kSequentialKey);
        CHECK(rk.words[0] == 0x00010203u);
        CHECK(rk.words[1] == 0x04050607u);
        CHECK(rk.words[2] == 0x08090a0bu);
        CHECK(rk.words[3] == 0x0c0d0e0fu);
        for (int i = 0; i < 16; ++i)
            CHECK(rk.round0_byte(i) ==
                  kSequentialKey.bytes[static_cast<std::size_t>(i)]);
    }
    SUBCASE("last word of the classic test key") {
        const aes::AesKey key{{0x2b, 0x7e, 0x15, 0x16, 0x28, 0xae, 0xd2, 0xa6,
                               0xab, 0xf7, 0x15, 0x88, 0x09, 0xcf, 0x4f,
                               0x3c}};
        CHECK(aes::key_expand(key).words[43] == 0xb6630ca6u);
    }
}

TEST_CASE("key schedule matches the byte-oriented oracle on random keys") {
    Rng rng(0x5eed);
    for (int trial = 0; trial < 200; ++trial) {
        const aes::AesKey key = random_key(rng);
        const auto rk = aes::key_expand(key);
        const auto ref = refaes::expand_key(key.bytes);
        for (int w = 0; w < 44; ++w) {
            const auto &round = ref[static_cast<std::size_t>(w / 4)];
            const std::uint32_t expected =
                (static_cast<std::uint32_t>(round[static_cast<std::size_t>(4 * (w % 4))]) << 24) |
                (static_cast<std::uint32_t>(round[static_cast<std::size_t>(4 * (w % 4) + 1)]) << 16) |
                (static_cast<std::uint32_t>(round[static_cast<std::size_t>(4 * (w % 4) + 2)]) << 8) |
                static_cast<std::uint32_t>(round[static_cast<std::size_t>(4 * (w % 4) + 3)]);
            CHECK(rk.words[static_cast<std::size_t>(w)] == expected);
        }
    }
}

TEST_CASE("standard vector and determinism") {
    const aes::Block pt{{0x00, 0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88,
                         0x99, 0xaa, 0xbb, 0xcc, 0xdd, 0xee, 0xff}};
    const aes::Block expected{{0x69, 0xc4, 0xe0, 0xd8, 0x6a, 0x7b, 0x04, 0x30,
                               0xd8, 0xcd, 0xb7, 0x80, 0x70, 0xb4, 0xc5,
                               0x5a}};
    const auto rk = aes::key_expand(kSequentialKey);
    CHECK(aes::encrypt(rk, pt) == expected);
    CHECK(aes::encrypt(rk, pt) == aes::encrypt(rk, pt));
}

TEST_CASE("encryption agrees with the textbook oracle on random inputs") {
    Rng rng(0xae51);
    for (int trial = 0; trial < 1000; ++trial) {
        const aes::AesKey key = random_key(rng);
        const aes::Block pt = random_block(rng);
        const auto ct = aes::encrypt(aes::key_expand(key), pt);
        CHECK(ct.bytes == refaes::encrypt(key.bytes, pt.bytes));
    }
}

TEST_CASE("first-round words at forced zero input") {
    const auto &tt = aes::TTableSet::instance();

    SUBCASE("zero key, zero plaintext") {
        const auto rk = aes::key_expand(aes::AesKey{});
        const auto words = aes::first_round_ttable_words(rk, aes::Block{});
        for (int i = 0; i < 16; ++i)
            CHECK(words[static_cast<std::size_t>(i)] == tt.t(i % 4, 0));
    }
    SUBCASE("plaintext equal to the key") {
        const auto rk = aes::key_expand(kSequentialKey);
        aes::Block pt;
        pt.bytes = kSequentialKey.bytes;
        const auto words = aes::first_round_ttable_words(rk, pt);
        for (int i = 0; i < 16; ++i)
            CHECK(words[static_cast<std::size_t>(i)] == tt.t(i % 4, 0));
    }
}

TEST_CASE("first-round words match the packing oracle on random inputs") {
    Rng rng(0xf00d);
    for (int trial = 0; trial < 500; ++trial) {
        const aes::AesKey key = random_key(rng);
        const aes::Block pt = random_block(rng);
        const auto rk = aes::key_expand(key);
        const auto words = aes::first_round_ttable_words(rk, pt);
        for (int i = 0; i < 16; ++i) {
            const auto x = static_cast<std::uint8_t>(
                pt.bytes[static_cast<std::size_t>(i)] ^
                key.bytes[static_cast<std::size_t>(i)]);
            const std::uint8_t s = refaes::sbox(x);
            const std::uint8_t bytes[4] = {refaes::gf_mul(s, 2), s, s,
                                           refaes::gf_mul(s, 3)};
            std::uint32_t expected = 0;
            for (int b = 0; b < 4; ++b)
                expected |=
                    static_cast<std::uint32_t>(bytes[(b - i % 4 + 4) % 4])
                    << (24 - 8 * b);
            CHECK(words[static_cast<std::size_t>(i)] == expected);
        }
    }
}

TEST_CASE("first-round words depend only on pt XOR key") {
    Rng rng(0x0bf);
    for (int trial = 0; trial < 200; ++trial) {
        const aes::AesKey key1 = random_key(rng);
        const aes::Block pt1 = random_block(rng);
        const aes::Block shift = random_block(rng);
        aes::AesKey key2;
        aes::Block pt2;
        for (int i = 0; i < 16; ++i) {
            key2.bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
                key1.bytes[static_cast<std::size_t>(i)] ^
                shift.bytes[static_cast<std::size_t>(i)]);
            pt2.bytes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
                pt1.bytes[static_cast<std::size_t>(i)] ^
                shift.bytes[static_cast<std::size_t>(i)]);
        }
        CHECK(aes::first_round_ttable_words(aes::key_expand(key1), pt1) ==
              aes::first_round_ttable_words(aes::key_expand(key2), pt2));
    }
}
