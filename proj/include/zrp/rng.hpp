#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "zrp/common.hpp"

namespace zrp {

/// philox4x64-10 block cipher (Random123 family).  Counter-based: the i-th
/// block of a stream is a pure function of (key, counter), so replicas keyed
/// by stream id are reproducible and embarrassingly parallel.
struct philox4x64 {
    static constexpr std::uint64_t mult0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t mult1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t weyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t weyl1 = 0xBB67AE8584CAA73BULL;

    static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                              std::array<std::uint64_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += weyl0;
                key[1] += weyl1;
            }
            const unsigned __int128 p0 = static_cast<unsigned __int128>(mult0) * ctr[0];
            const unsigned __int128 p1 = static_cast<unsigned __int128>(mult1) * ctr[2];
            const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
            const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
            const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
            const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

/// One reproducible stream of uniforms/normals: key = (seed, stream id),
/// counter walks forward block by block.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_{seed, stream}, counter_{0, 0, 0, 0} {}

    std::uint64_t raw() {
        if (have_ == 0) {
            buf_ = philox4x64::block(counter_, key_);
            have_ = 4;
            if (++counter_[0] == 0 && ++counter_[1] == 0 && ++counter_[2] == 0) ++counter_[3];
        }
        return buf_[4 - have_--];
    }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(raw() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal (Box-Muller; the partner variate is cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double phi = two_pi * uniform();
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    std::array<double, 3> normal3() { return {normal(), normal(), normal()}; }

private:
    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> counter_;
    std::array<std::uint64_t, 4> buf_{};
    int have_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace zrp
