#pragma once

#include <array>
#include <cstdint>

namespace herdsim {

// xoshiro256** seeded via splitmix64. Pinned here so identical seeds give
// identical streams on every platform; std distributions make no such promise.
struct Rng {
    std::array<std::uint64_t, 4> s{};

    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t x = seed;
        for (auto& w : s) {
            x += 0x9e3779b97f4a7c15ull;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            w = z ^ (z >> 31);
        }
    }

    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t next() {
        std::uint64_t result = rotl(s[1] * 5, 7) * 9;
        std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // Uniform in [0, n). Rejection sampling keeps it exactly uniform.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t limit = ~0ull - ~0ull % n;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    bool operator==(const Rng& o) const { return s == o.s; }
};

}  // namespace herdsim
