#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bmvd {

// Philox4x32-10 counter-based stream. Each (seed, stream) pair is an
// independent sequence addressed by a 128-bit block counter, so per-path
// streams are reproducible regardless of how paths are scheduled.
class PhiloxRng {
  public:
    PhiloxRng(uint64_t seed, uint64_t stream) {
        key_[0] = static_cast<uint32_t>(seed);
        key_[1] = static_cast<uint32_t>(seed >> 32);
        ctr_[2] = static_cast<uint32_t>(stream);
        ctr_[3] = static_cast<uint32_t>(stream >> 32);
    }

    uint32_t next_u32() {
        if (have_ == 0) {
            block_ = philox_block(ctr_, key_);
            if (++ctr_[0] == 0) ++ctr_[1];
            have_ = 4;
        }
        return block_[4 - have_--];
    }

    uint64_t next_u64() {
        const uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // Uniform in (0, 1): 53 random bits, offset half an ulp away from 0.
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double m = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = m * std::sin(a);
        has_spare_ = true;
        return m * std::cos(a);
    }

  private:
    static std::array<uint32_t, 4> philox_block(std::array<uint32_t, 4> c,
                                                std::array<uint32_t, 2> k) {
        constexpr uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const uint64_t p0 = static_cast<uint64_t>(M0) * c[0];
            const uint64_t p1 = static_cast<uint64_t>(M1) * c[2];
            const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
            const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
            k[0] += W0;
            k[1] += W1;
        }
        return c;
    }

    std::array<uint32_t, 2> key_{0, 0};
    std::array<uint32_t, 4> ctr_{0, 0, 0, 0};
    std::array<uint32_t, 4> block_{};
    int have_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace bmvd
