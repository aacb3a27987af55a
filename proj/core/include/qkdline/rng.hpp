#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qkdline {

// Stage seeds are derived from one root seed so that pipeline stages can be
// re-run in isolation: stage_seed = splitmix64(root ^ fnv1a64(stage_name)).

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) {
    return splitmix64(root ^ fnv1a64(stage));
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view stage) {
    return std::mt19937_64(derive_seed(root, stage));
}

}  // namespace qkdline
