#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace metats {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive decorrelated stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent generator from a root seed and a path of stream
/// identifiers, e.g. make_stream(seed, {policy, track, purpose}). The result
/// depends only on its arguments, never on the order streams are created in.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(seed);
    for (auto id : path) h = mix64(h ^ mix64(id + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

inline double standard_normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace metats
