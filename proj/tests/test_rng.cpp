#include <doctest.h>

#include <cmath>
#include <set>

#include "prbm/rng.hpp"

using prbm::RngStream;

TEST_CASE("philox block matches published known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(RngStream::philox({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(RngStream::philox({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(RngStream::philox({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("first stream words are the philox block of counter zero") {
    RngStream g(0, 0);
    CHECK(g.next_u32() == 0x6627e8d5u);
    CHECK(g.next_u32() == 0xe169c58du);
}

TEST_CASE("same seed and stream reproduce, different streams differ") {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    int same = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        CHECK(x == b());
        if (x == c()) ++same;
    }
    CHECK(same == 0);
}

TEST_CASE("split children are reproducible and distinct") {
    RngStream parent(5, 3);
    std::set<std::uint64_t> firsts;
    for (int k = 0; k < 64; ++k) {
        RngStream c1 = parent.split(k), c2 = parent.split(k);
        const auto v = c1();
        CHECK(v == c2());
        firsts.insert(v);
    }
    CHECK(firsts.size() == 64);
}

TEST_CASE("uniform stays in the open unit interval with the right moments") {
    RngStream g(1, 0);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        s += u;
        s2 += u * u;
    }
    CHECK(std::abs(s / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(s2 / n - 1.0 / 3) < 0.005);
}
