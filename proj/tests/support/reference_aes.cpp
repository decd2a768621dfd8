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

#include "reference_aes.hpp"

namespace refaes {

std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
    std::uint8_t p = 0;
    while (b) {
        if (b & 1)
            p ^= a;
        const bool hi = a & 0x80;
        a = static_cast<std::uint8_t>(a << 1);
        if (hi)
            a ^= 0x1b;
        b >>= 1;
    }
    return p;
}

namespace {

std::uint8_t gf_inverse(std::uint8_t a) {
    if (a == 0)
        return 0;
    // a^254 by square-and-multiply.
    std::uint8_t result = 1;
    std::uint8_t base = a;
    int e = 254;
    while (e) {
        if (e & 1)
            result = gf_mul(result, base);
        base = gf_mul(base, base);
        e >>= 1;
    }
    return result;
}

std::uint8_t rotl8(std::uint8_t x, int k) {
    return static_cast<std::uint8_t>((x << k) | (x >> (8 - k)));
}

} // namespace

std::uint8_t sbox(std::uint8_t x) {
    const std::uint8_t inv = gf_inverse(x);
    return static_cast<std::uint8_t>(inv ^ rotl8(inv, 1) ^ rotl8(inv, 2) ^
                                     rotl8(inv, 3) ^ rotl8(inv, 4) ^ 0x63);
}

std::array<Bytes16, 11> expand_key(const Bytes16 &key) {
    std::array<Bytes16, 11> rk{};
    rk[0] = key;
    std::uint8_t rcon = 0x01;
    for (int round = 1; round <= 10; ++round) {
        const Bytes16 &prev = rk[static_cast<std::size_t>(round - 1)];
        Bytes16 &cur = rk[static_cast<std::size_t>(round)];
        std::uint8_t t[4] = {sbox(prev[13]), sbox(prev[14]), sbox(prev[15]),
                             sbox(prev[12])};
        t[0] ^= rcon;
        rcon = gf_mul(rcon, 2);
        for (int i = 0; i < 4; ++i)
            cur[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(prev[static_cast<std::size_t>(i)] ^ t[i]);
        for (int i = 4; i < 16; ++i)
            cur[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
                prev[static_cast<std::size_t>(i)] ^
                cur[static_cast<std::size_t>(i - 4)]);
    }
    return rk;
}

namespace {

void add_round_key(Bytes16 &state, const Bytes16 &rk) {
    for (int i = 0; i < 16; ++i)
        state[static_cast<std::size_t>(i)] ^= rk[static_cast<std::size_t>(i)];
}

void sub_bytes(Bytes16 &state) {
    for (auto &b : state)
        b = sbox(b);
}

// State is column-major: byte i sits at row i%4, column i/4.
void shift_rows(Bytes16 &state) {
    Bytes16 out;
    for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 4; ++col)
            out[static_cast<std::size_t>(4 * col + row)] =
                state[static_cast<std::size_t>(4 * ((col + row) % 4) + row)];
    state = out;
}

void mix_columns(Bytes16 &state) {
    for (int col = 0; col < 4; ++col) {
        std::uint8_t *c = &state[static_cast<std::size_t>(4 * col)];
        const std::uint8_t a0 = c[0], a1 = c[1], a2 = c[2], a3 = c[3];
        c[0] = static_cast<std::uint8_t>(gf_mul(a0, 2) ^ gf_mul(a1, 3) ^ a2 ^ a3);
        c[1] = static_cast<std::uint8_t>(a0 ^ gf_mul(a1, 2) ^ gf_mul(a2, 3) ^ a3);
        c[2] = static_cast<std::uint8_t>(a0 ^ a1 ^ gf_mul(a2, 2) ^ gf_mul(a3, 3));
        c[3] = static_cast<std::uint8_t>(gf_mul(a0, 3) ^ a1 ^ a2 ^ gf_mul(a3, 2));
    }
}

} // namespace

Bytes16 encrypt(const Bytes16 &key, const Bytes16 &pt) {
    const auto rk = expand_key(key);
    Bytes16 state = pt;
    add_round_key(state, rk[0]);
    for (int round = 1; round <= 9; ++round) {
        sub_bytes(state);
        shift_rows(state);
        mix_columns(state);
        add_round_key(state, rk[static_cast<std::size_t>(round)]);
    }
    sub_bytes(state);
    shift_rows(state);
    add_round_key(state, rk[10]);
    return state;
}

} // namespace refaes
