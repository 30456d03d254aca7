#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace phenoclust::rng {

// Counter-based randomness: every draw is a pure function of its coordinates,
// so results do not depend on evaluation order or thread scheduling.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Hashes an arbitrary tuple of 64-bit coordinates into one word.
template <typename... Ts>
constexpr std::uint64_t hash(std::uint64_t seed, Ts... coords) noexcept {
    std::uint64_t h = splitmix64(seed);
    ((h = splitmix64(h ^ static_cast<std::uint64_t>(coords))), ...);
    return h;
}

/// Uniform in the open interval (0, 1), 53-bit resolution.
constexpr double to_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

template <typename... Ts>
double uniform(std::uint64_t seed, Ts... coords) noexcept {
    return to_unit(hash(seed, coords...));
}

/// Standard normal via Box-Muller on two independent counter draws.
template <typename... Ts>
double gaussian(std::uint64_t seed, Ts... coords) noexcept {
    const double u1 = uniform(seed, coords..., 0x6A09E667ULL);
    const double u2 = uniform(seed, coords..., 0xBB67AE85ULL);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Unbiased integer in [0, bound) drawn from a 64-bit engine; portable, unlike
/// std::uniform_int_distribution whose algorithm is implementation-defined.
template <typename Engine>
std::uint64_t bounded(Engine& engine, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = 0;
    do {
        draw = engine();
    } while (draw >= limit);
    return draw % bound;
}

/// Fisher-Yates permutation of [0, n) fully determined by `key`.
inline std::vector<std::size_t> permutation(std::size_t n, std::uint64_t key) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 engine(key);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded(engine, i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

} // namespace phenoclust::rng
