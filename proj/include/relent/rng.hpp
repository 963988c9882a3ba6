#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace relent {

/// Philox4x32-10 counter-based generator. Stateless: every draw is a pure
/// function of (seed, member, step, mode), so ensemble members and thread
/// schedules cannot perturb each other's streams.
namespace philox {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(M0, ctr[0], hi0, lo0);
        mulhilo(M1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

inline double to_unit(std::uint64_t x) {
    // 53 significant bits mapped into the open interval (0,1)
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace philox

/// Standard normal draw keyed by (seed, member, step, mode). Box-Muller on one
/// Philox block.
inline double counter_gaussian(std::uint64_t seed, std::uint32_t member, std::uint64_t step,
                               std::uint32_t mode) {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), mode, member};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    const auto v = philox::block(ctr, key);
    const double u1 = philox::to_unit((static_cast<std::uint64_t>(v[0]) << 32) | v[1]);
    const double u2 = philox::to_unit((static_cast<std::uint64_t>(v[2]) << 32) | v[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Uniform draw in [0,1) with an independent key path (distinct mode space),
/// used for deterministic auxiliary randomization (test fields, phases).
inline double counter_uniform(std::uint64_t seed, std::uint32_t member, std::uint64_t step,
                              std::uint32_t mode) {
    const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(step),
                                              static_cast<std::uint32_t>(step >> 32),
                                              mode ^ 0x80000000u, member};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    const auto v = philox::block(ctr, key);
    return philox::to_unit((static_cast<std::uint64_t>(v[0]) << 32) | v[1]);
}

}  // namespace relent
