#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace jawab {

// MurmurHash64A. Fixed seed per index so builds are reproducible across
// machines and build parallelism.
inline uint64_t murmur64(std::string_view data, uint64_t seed) {
    const uint64_t m = 0xc6a4a7935bd1e995ULL;
    const int r = 47;
    uint64_t h = seed ^ (static_cast<uint64_t>(data.size()) * m);

    const char* p = data.data();
    const char* end = p + (data.size() / 8) * 8;
    while (p != end) {
        uint64_t k;
        std::memcpy(&k, p, 8);
        p += 8;
        k *= m;
        k ^= k >> r;
        k *= m;
        h ^= k;
        h *= m;
    }

    const unsigned char* tail = reinterpret_cast<const unsigned char*>(p);
    switch (data.size() & 7) {
        case 7: h ^= static_cast<uint64_t>(tail[6]) << 48; [[fallthrough]];
        case 6: h ^= static_cast<uint64_t>(tail[5]) << 40; [[fallthrough]];
        case 5: h ^= static_cast<uint64_t>(tail[4]) << 32; [[fallthrough]];
        case 4: h ^= static_cast<uint64_t>(tail[3]) << 24; [[fallthrough]];
        case 3: h ^= static_cast<uint64_t>(tail[2]) << 16; [[fallthrough]];
        case 2: h ^= static_cast<uint64_t>(tail[1]) << 8; [[fallthrough]];
        case 1: h ^= static_cast<uint64_t>(tail[0]); h *= m;
    }

    h ^= h >> r;
    h *= m;
    h ^= h >> r;
    return h;
}

// FNV-1a, used for config digests and file checksums.
struct Fnv1a64 {
    uint64_t state = 0xcbf29ce484222325ULL;

    void update(const void* data, size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        uint64_t h = state;
        for (size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
        state = h;
    }
    void update(std::string_view s) { update(s.data(), s.size()); }
    uint64_t digest() const { return state; }
};

inline uint64_t fnv1a64(std::string_view s) {
    Fnv1a64 h;
    h.update(s);
    return h.digest();
}

} // namespace jawab
