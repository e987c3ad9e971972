#pragma once
// Deterministic 64-bit primitives shared across the pipeline.
//
// SplitMix64 is the project PRNG. Every seeded procedure (mock providers,
// tree building, trajectory sampling) draws from this generator so that
// independent implementations can agree bit-for-bit.
//
// Algorithm: Steele, Lea & Flood, "Fast splittable pseudorandom number
// generators" (the java.util.SplittableRandom finalizer). State advances by
// the golden-ratio increment; output is a two-round xor-multiply mix.
//
// Test vectors (state = seed, successive next() calls):
//   seed 0  -> 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F
//   seed 42 -> 0xBDD732262FEB6E95, 0x28EFE333B266F103, 0x47526757130F9F52
//
// FNV-1a (64-bit) is the project content hash: offset basis
// 0xCBF29CE484222325, prime 0x100000001B3.
//   fnv1a64("")    = 0xCBF29CE484222325
//   fnv1a64("a")   = 0xAF63DC4C8601EC8C
//   fnv1a64("abc") = 0xE71FA2190541574B

#include <cstdint>
#include <string_view>

namespace cotforge {

class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
    uint64_t next_in(uint64_t lo, uint64_t hi) {
        return lo + next() % (hi - lo + 1);
    }

    // Uniform double in [0, 1) with 53 bits of randomness.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    uint64_t state_;
};

constexpr uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

static_assert(fnv1a64("") == 0xCBF29CE484222325ull);
static_assert(fnv1a64("abc") == 0xE71FA2190541574Bull);

} // namespace cotforge
