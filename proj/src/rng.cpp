// rng.cpp — Philox 4x32-10 and stream plumbing.

#include "ancova/rng.hpp"

#include <cmath>

namespace ancova {

namespace {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& x, std::uint32_t k0,
                         std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * x[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * x[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
}

inline double u01_from_words(std::uint32_t lo, std::uint32_t hi) {
    const std::uint64_t w = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

constexpr double kTwoPi = 6.283185307179586;

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) {
    std::uint32_t k0 = key[0];
    std::uint32_t k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        philox_round(counter, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return counter;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t unit, StreamTag tag,
                           std::uint32_t attempt) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    // stream id: low word carries tag and redraw attempt, high word the unit.
    stream_lo_ = static_cast<std::uint32_t>(tag) | (attempt << 4);
    stream_hi_ = static_cast<std::uint32_t>(unit);
}

double RandomStream::next_u01() {
    if (has_pending_) {
        has_pending_ = false;
        return pending_;
    }
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        stream_lo_, stream_hi_};
    const auto out = Philox4x32::block(ctr, key_);
    ++block_;
    pending_ = u01_from_words(out[2], out[3]);
    has_pending_ = true;
    return u01_from_words(out[0], out[1]);
}

double RandomStream::next_normal() {
    const double u1 = next_u01();
    const double u2 = next_u01();
    // 1-u1 lies in (0,1], so the log is finite.
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(kTwoPi * u2);
}

std::uint64_t RandomStream::next_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const double u = next_u01();
    auto r = static_cast<std::uint64_t>(u * static_cast<double>(bound));
    return r >= bound ? bound - 1 : r;
}

}  // namespace ancova
