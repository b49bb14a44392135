#pragma once

#include <cstdint>

namespace dosn {

// splitmix64: tiny, fully portable deterministic generator. The benchmark's
// byte-identical-output guarantee rules out stdlib distributions.
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, n); n > 0
    std::uint64_t bounded(std::uint64_t n) { return next() % n; }
};

} // namespace dosn
