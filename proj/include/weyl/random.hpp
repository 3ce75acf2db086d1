#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace weyl {

/// SplitMix64 finalizer (Steele, Lea & Flood).
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a master seed and a path of indices, e.g.
/// (master, annulus k, trial). Each index is folded in with one SplitMix64
/// round, so the result depends only on the path, never on call order.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
    return h;
}

using Rng = std::mt19937_64;

}  // namespace weyl
