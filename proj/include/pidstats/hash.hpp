#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace pidstats {

// 64-bit seeded string hash used by both sketches; the seed is recorded in
// serialized artifacts so results are reproducible across runs.
inline uint64_t mix64(uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

inline uint64_t hash64(std::string_view data, uint64_t seed) {
    uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
    size_t i = 0;
    while (i + 8 <= data.size()) {
        uint64_t k;
        std::memcpy(&k, data.data() + i, 8);
        h = mix64(h ^ k) * 0x2545f4914f6cdd1dULL;
        i += 8;
    }
    uint64_t tail = 0;
    if (i < data.size())
        std::memcpy(&tail, data.data() + i, data.size() - i);
    h = mix64(h ^ tail ^ (uint64_t)data.size());
    return mix64(h);
}

}  // namespace pidstats
