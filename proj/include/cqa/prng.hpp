#pragma once

#include <cstdint>

namespace cqa {

/// splitmix64: 64-bit state, one scramble per draw. The output sequence is a
/// pure function of the seed and identical on every platform, which is what
/// makes generated datasets reproducible byte for byte.
class Splitmix64 {
  public:
    explicit Splitmix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Top bit of the next draw.
    int next_bit() { return static_cast<int>(next() >> 63); }

    /// Uniform draw in [0, n) by rejection; no modulo bias.
    uint64_t bounded(uint64_t n) {
        uint64_t threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform double in [0, 1) with 53 bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// One scramble of the splitmix64 finalizer, stateless.
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Sub-stream for item `index` of an experiment seeded with `seed`:
    /// the stream seed is mix(seed) ^ mix(index + 1). Items drawn from
    /// distinct indices are independent and reproducible in isolation.
    static Splitmix64 stream(uint64_t seed, uint64_t index) {
        return Splitmix64(mix(seed) ^ mix(index + 1));
    }

  private:
    uint64_t state_;
};

} // namespace cqa
