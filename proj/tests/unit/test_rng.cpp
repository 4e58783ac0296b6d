#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "lssd/rng.hpp"

using namespace lssd;

TEST_CASE("philox4x32-10 matches published known-answer vectors") {
    auto r1 = rng::Philox4x32::block({0, 0, 0, 0}, {0, 0});
    CHECK(r1 == std::array<uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});

    auto r2 = rng::Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
    CHECK(r2 == std::array<uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});

    auto r3 = rng::Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
    CHECK(r3 == std::array<uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are deterministic and independent") {
    rng::Stream a(42, 7, 0);
    rng::Stream b(42, 7, 0);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u32() == b.next_u32());

    rng::Stream c(42, 7, 1);   // different substream
    rng::Stream d(42, 8, 0);   // different stream id
    rng::Stream e(43, 7, 0);   // different master seed
    rng::Stream base(42, 7, 0);
    const uint64_t first = base.next_u64();
    CHECK(c.next_u64() != first);
    CHECK(d.next_u64() != first);
    CHECK(e.next_u64() != first);
}

TEST_CASE("stream for_id keys off the id text") {
    rng::Stream a = rng::Stream::for_id(1, "alaska2/img_000001");
    rng::Stream b = rng::Stream::for_id(1, "alaska2/img_000002");
    CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("uniform draws stay in range") {
    rng::Stream s(5, 5, 5);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform_open();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 10000; ++i) {
        CHECK(s.uniform_int(7) < 7u);
    }
}

TEST_CASE("normal and gamma have roughly the right moments") {
    rng::Stream s(11, 3, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        sum += x;
        sum2 += x * x;
    }
    CHECK(std::fabs(sum / n) < 0.01);
    CHECK(std::fabs(sum2 / n - 1.0) < 0.02);

    double gsum = 0.0;
    for (int i = 0; i < n; ++i) gsum += s.gamma(4.0);
    CHECK(std::fabs(gsum / n - 4.0) < 0.03);

    double esum = 0.0;
    for (int i = 0; i < n; ++i) esum += s.gamma(1.0);
    CHECK(std::fabs(esum / n - 1.0) < 0.01);

    // shape below 1 goes through the boost path
    double hsum = 0.0;
    for (int i = 0; i < n; ++i) hsum += s.gamma(0.5);
    CHECK(std::fabs(hsum / n - 0.5) < 0.01);
}

TEST_CASE("fnv1a64 distinguishes nearby strings") {
    std::set<uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        seen.insert(rng::fnv1a64("img_" + std::to_string(i)));
    }
    CHECK(seen.size() == 1000);
}
