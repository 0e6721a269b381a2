#pragma once

// Counter-based random streams (Philox4x32-10).
//
// A stream is addressed by (seed, stream_id); the draw index is the counter.
// Distinct stream ids never share a counter block, so parallel chains can be
// given streams 0, 1, 2, ... without coordination.

#include <array>
#include <cstdint>
#include <utility>

#include "esmc/normal.hpp"

namespace esmc {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// The Philox4x32 bijection with 10 rounds.
inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter = 0) noexcept
        : seed_(seed), stream_id_(stream_id), block_(counter / 2), offset_(counter % 2) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    /// Number of 64-bit words drawn so far.
    std::uint64_t counter() const noexcept { return block_ * 2 + offset_; }

    std::uint64_t next_u64() noexcept {
        if (!cached_) refill();
        const std::uint64_t out = words_[offset_];
        if (++offset_ == 2) {
            offset_ = 0;
            ++block_;
            cached_ = false;
        }
        return out;
    }

    /// Uniform on the open interval (0, 1): midpoints of a 2^-52 grid, so
    /// the value and its complement are both exact.
    double uniform01() noexcept {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    /// Standard normal by inversion; the result depends only on the counter.
    double normal() noexcept {
        const auto [p, q] = uniform_pq();
        return detail::normal_quantile_pq(p, q);
    }

private:
    void refill() noexcept {
        const PhiloxCounter ctr = {static_cast<std::uint32_t>(block_),
                                   static_cast<std::uint32_t>(block_ >> 32),
                                   static_cast<std::uint32_t>(stream_id_),
                                   static_cast<std::uint32_t>(stream_id_ >> 32)};
        const PhiloxKey key = {static_cast<std::uint32_t>(seed_),
                               static_cast<std::uint32_t>(seed_ >> 32)};
        const PhiloxCounter out = philox4x32_10(ctr, key);
        words_[0] = static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
        words_[1] = static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32);
        cached_ = true;
    }

    std::pair<double, double> uniform_pq() noexcept {
        const std::uint64_t k = next_u64() >> 12;
        const double p = (static_cast<double>(k) + 0.5) * 0x1.0p-52;
        const double q = (static_cast<double>((1ull << 52) - 1 - k) + 0.5) * 0x1.0p-52;
        return {p, q};
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_;
    unsigned offset_;
    bool cached_ = false;
    std::array<std::uint64_t, 2> words_{};
};

}  // namespace esmc
