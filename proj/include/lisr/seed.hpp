#pragma once

#include <cstdint>
#include <string_view>

namespace lisr {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent seed for one pipeline stage, derived from the top-level seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : stage) h = (h ^ c) * 0x100000001b3ULL;
    return splitmix64(seed ^ splitmix64(h));
}

}  // namespace lisr
