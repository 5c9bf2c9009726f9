#include "opiniond/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <vector>

using namespace opiniond;

TEST_CASE("Pcg32 reference sequence is stable") {
    // PCG-XSH-RR 32 with the canonical demo seeding; frozen so any change
    // to the generator (and thus to every stored artifact) is caught.
    Pcg32 rng(42u, 54u);
    std::vector<std::uint32_t> got;
    for (int i = 0; i < 6; ++i) {
        got.push_back(rng.next_u32());
    }
    std::vector<std::uint32_t> expected = {0xa15c02b7u, 0x7b47f409u, 0xba1d3330u,
                                           0x83d2f293u, 0xbfa4784bu, 0xcbed606eu};
    REQUIRE(got == expected);
}

TEST_CASE("same seed gives identical streams") {
    Pcg32 a(123u, 7u);
    Pcg32 b(123u, 7u);
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(a.next_u32() == b.next_u32());
    }
}

TEST_CASE("uniform01 stays in [0,1)") {
    Pcg32 rng(1u, 0u);
    for (int i = 0; i < 100000; ++i) {
        double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("uniform_below respects the bound") {
    Pcg32 rng(9u, 3u);
    for (int i = 0; i < 100000; ++i) {
        REQUIRE(rng.uniform_below(7) < 7u);
    }
    REQUIRE(rng.uniform_below(1) == 0u);
}

TEST_CASE("bernoulli edge probabilities") {
    Pcg32 rng(5u, 5u);
    for (int i = 0; i < 1000; ++i) {
        REQUIRE_FALSE(rng.bernoulli(0.0));
        REQUIRE(rng.bernoulli(1.0));
    }
}

TEST_CASE("make_stream derives independent reproducible streams") {
    Pcg32 a1 = make_stream(99, 0);
    Pcg32 a2 = make_stream(99, 0);
    Pcg32 b = make_stream(99, 1);
    bool all_equal = true;
    for (int i = 0; i < 100; ++i) {
        std::uint32_t x = a1.next_u32();
        REQUIRE(x == a2.next_u32());
        all_equal = all_equal && (x == b.next_u32());
    }
    REQUIRE_FALSE(all_equal);
}
