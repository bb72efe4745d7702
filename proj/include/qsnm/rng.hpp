#pragma once

#include <cstdint>

namespace qsnm {

// splitmix64: the fixed, documented generator behind every reproducible
// random choice in this project (sample points, random manifolds). Keeping
// the algorithm pinned here makes generated spec files stable across
// platforms and toolchains.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [-1, 1)
    double next_symmetric() { return 2.0 * next_unit() - 1.0; }

    // uniform integer in [0, bound)
    std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }
};

}  // namespace qsnm
