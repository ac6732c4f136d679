// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace hrh {

// Philox4x32-10 (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k)
{
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += w0;
        k[1] += w1;
    }
    return c;
}

enum class StreamRole : std::uint32_t {
    integrator_noise = 1,
    frequency_error = 2,
    phase_law = 3,
    lo_phase = 4,
    sampled_noise = 5,
};

struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::uint32_t slot = 0;
    StreamRole role = StreamRole::integrator_noise;
};

// Independent stream for every (seed, trial, slot, role); draws do not depend
// on which thread evaluates the trial or in which order.
class RandomStream {
public:
    explicit RandomStream(const StreamKey& key)
        : key_{static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)},
          trial_lo_(static_cast<std::uint32_t>(key.trial)),
          hi_(static_cast<std::uint32_t>(key.role) << 16 | static_cast<std::uint32_t>(key.trial >> 32 & 0xFFFFu)),
          slot_(key.slot)
    {
    }

    std::uint32_t next_u32()
    {
        if (pos_ == 4) {
            buf_ = philox4x32({block_++, slot_, trial_lo_, hi_}, key_);
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform()
    {
        const std::uint64_t a = next_u32() >> 5, b = next_u32() >> 6;
        return static_cast<double>(a << 26 | b) * 0x1.0p-53;
    }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    // Circular complex Gaussian with E|n|^2 = variance.
    std::complex<double> complex_normal(double variance)
    {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t trial_lo_;
    std::uint32_t hi_;
    std::uint32_t slot_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace hrh
