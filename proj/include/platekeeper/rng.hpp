#pragma once

#include <cstdint>

namespace platekeeper {

/// SplitMix64 (Steele, Lea, Flood 2014). Fixed algorithm so seeded workloads
/// are reproducible everywhere.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Unbiased draw from [0, bound). bound must be > 0.
    std::uint64_t uniform(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    /// Inclusive range.
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + uniform(hi - lo + 1); }

    /// Independent child stream.
    SplitMix64 split() { return SplitMix64(next()); }

private:
    std::uint64_t state_;
};

}  // namespace platekeeper
