#pragma once

#include <cstdint>

namespace fraclat {

// SplitMix64 finalizer; stateless counter-based streams keyed by
// (master_seed, sample_index, site_index) so every draw is reproducible
// independently of thread scheduling.
inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline uint64_t substream(uint64_t master_seed, uint64_t a, uint64_t b) {
    return mix64(mix64(master_seed ^ mix64(a + 0x5851F42D4C957F2DULL)) + b);
}

// uniform double in [0, 1)
inline double uniform01(uint64_t bits) { return double(bits >> 11) * 0x1.0p-53; }

}  // namespace fraclat
