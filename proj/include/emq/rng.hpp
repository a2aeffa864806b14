#pragma once

#include <cstdint>

namespace emq {

// splitmix64: cheap, full-period 64-bit mixer.  Used to derive independent
// per-sample seeds from (seed, index) so ensemble loops can run in any order
// or in parallel and still produce identical streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index * 0x9e3779b97f4a7c15ull + 1));
}

} // namespace emq
