#include <doctest.h>

#include "cotforge/prng.hpp"

using cotforge::SplitMix64;
using cotforge::fnv1a64;

TEST_CASE("splitmix64 matches the published sequence") {
    SplitMix64 rng(0);
    CHECK(rng.next() == 0xE220A8397B1DCDAFull);
    CHECK(rng.next() == 0x6E789E6AA1B965F4ull);
    CHECK(rng.next() == 0x06C45D188009454Full);

    SplitMix64 rng42(42);
    CHECK(rng42.next() == 0xBDD732262FEB6E95ull);
    CHECK(rng42.next() == 0x28EFE333B266F103ull);
    CHECK(rng42.next() == 0x47526757130F9F52ull);
}

TEST_CASE("splitmix64 bounded draw stays in range") {
    SplitMix64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const uint64_t v = rng.next_in(2, 4);
        CHECK(v >= 2);
        CHECK(v <= 4);
    }
    SplitMix64 degenerate(9);
    CHECK(degenerate.next_in(3, 3) == 3);
}

TEST_CASE("splitmix64 double draw is in [0, 1)") {
    SplitMix64 rng(123);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("fnv1a64 test vectors") {
    CHECK(fnv1a64("") == 0xCBF29CE484222325ull);
    CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8Cull);
    CHECK(fnv1a64("abc") == 0xE71FA2190541574Bull);
    CHECK(fnv1a64("cotforge") == 0x37CD937185F5B1FCull);
}
