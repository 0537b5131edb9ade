#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fbsde {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless: a
// draw is a pure function of (key, counter), so any path/step can be generated
// independently of how many others exist or which worker produces them.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            ctr = single_round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    static constexpr Counter single_round(const Counter& c, const Key& k) {
        const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Standard normal draws keyed by (seed, path, step, component).
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    /// Fills out[0..n) with independent N(0,1) draws for (path, step).
    void fill(std::uint64_t path, std::uint64_t step, double* out, int n) const {
        for (int block = 0; 2 * block < n; ++block) {
            const Philox4x32::Counter ctr{static_cast<std::uint32_t>(path),
                                          static_cast<std::uint32_t>(path >> 32),
                                          static_cast<std::uint32_t>(step),
                                          static_cast<std::uint32_t>(block)};
            const auto r = Philox4x32::apply(ctr, key_);
            const double u1 = to_open_unit(r[0], r[1]);
            const double u2 = to_open_unit(r[2], r[3]);
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double angle = 2.0 * std::numbers::pi * u2;
            out[2 * block] = radius * std::cos(angle);
            if (2 * block + 1 < n) out[2 * block + 1] = radius * std::sin(angle);
        }
    }

    /// 53-bit uniform on (0, 1).
    static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

private:
    Philox4x32::Key key_;
};

} // namespace fbsde
