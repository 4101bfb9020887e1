// SPDX-License-Identifier: Apache-2.0
//
// risbc - sum-rate optimization for RIS-aided MIMO broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef RISBC_RNG_HPP
#define RISBC_RNG_HPP

#include "risbc/common.hpp"

#include <array>
#include <cstdint>

namespace risbc {

// Philox4x64-10 counter-based generator. A stream is addressed by the
// 128-bit key (master seed, stream id); the 256-bit block counter walks the
// sequence. Identical (seed, stream) always reproduces the same values,
// independent of platform and of how other streams are consumed, which is
// what makes realization-level parallelism deterministic.
class Philox4x64 {
public:
    using Block = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static Block block(Block ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B97F4A7C15ULL;
                key[1] += 0xBB67AE8584CAA73BULL;
            }
            std::uint64_t hi0, lo0, hi1, lo1;
            mulhilo(0xD2E7470EE14C6C93ULL, ctr[0], hi0, lo0);
            mulhilo(0xCA5A826395121157ULL, ctr[2], hi1, lo1);
            ctr = Block{hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                        std::uint64_t& lo) {
        const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        hi = static_cast<std::uint64_t>(p >> 64);
        lo = static_cast<std::uint64_t>(p);
    }
};

// One independent stream of the counter-based generator, with the small
// sampling vocabulary the simulator needs.
class SeededRng {
public:
    SeededRng(std::uint64_t master_seed, std::uint64_t stream_id)
        : key_{master_seed, stream_id} {}

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            buf_ = Philox4x64::block(ctr_, key_);
            pos_ = 0;
            advance_counter();
        }
        return buf_[pos_++];
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1); never returns 0 so it is safe under log().
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; pairs are consumed eagerly so a stream
    // position identifies the sample deterministically.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * pi_v<double> * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Circularly symmetric complex normal with unit variance,
    // E{|z|^2} = 1.
    std::complex<double> cgaussian() {
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-std::log(u1)); // variance 1/2 per part
        const double a = 2.0 * pi_v<double> * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    // Uniform element of {0, 1, ..., n-1}.
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    // Discrete uniform draw from {lo, lo+step, ..., hi} inclusive.
    double uniform_grid(double lo, double hi, double step) {
        const auto n = static_cast<std::uint64_t>(std::llround((hi - lo) / step)) + 1;
        return lo + static_cast<double>(uniform_index(n)) * step;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    void advance_counter() {
        for (auto& c : ctr_)
            if (++c != 0) break;
    }

    Philox4x64::Key key_;
    Philox4x64::Block ctr_{0, 0, 0, 0};
    Philox4x64::Block buf_{};
    int pos_ = 4;
    double spare_ = 0;
    bool have_spare_ = false;
};

// Stream ids: realization r of an experiment uses derive_stream(r, purpose).
// Purposes keep channel sampling, CSI error and blockage draws independent.
enum class RngPurpose : std::uint64_t {
    geometry = 0,
    channels = 1,
    csi_error = 2,
    blockage = 3,
    init = 4,
};

inline std::uint64_t derive_stream(std::uint64_t realization, RngPurpose purpose) {
    return realization * 16 + static_cast<std::uint64_t>(purpose);
}

} // namespace risbc

#endif
