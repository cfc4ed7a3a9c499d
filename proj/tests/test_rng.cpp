#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "couplab/mc.hpp"
#include "couplab/rng.hpp"

using namespace couplab;

TEST_CASE("philox4x32-10 known-answer vectors", "[rng]") {
    // Reference vectors published with the Philox generator.
    {
        const auto out = rng::philox4x32({0, 0, 0, 0}, 0);
        CHECK(out[0] == 0x6627e8d5u);
        CHECK(out[1] == 0xe169c58du);
        CHECK(out[2] == 0xbc57ac4cu);
        CHECK(out[3] == 0x9b00dbd8u);
    }
    {
        const auto out = rng::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                         0xffffffffffffffffull);
        CHECK(out[0] == 0x408f276du);
        CHECK(out[1] == 0x41c83b0eu);
        CHECK(out[2] == 0xa20bc7c6u);
        CHECK(out[3] == 0x6d5451fdu);
    }
    {
        const auto out = rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                         (0x299f31d0ull << 32) | 0xa4093822ull);
        CHECK(out[0] == 0xd16cfe09u);
        CHECK(out[1] == 0x94fdccebu);
        CHECK(out[2] == 0x5001e420u);
        CHECK(out[3] == 0x24126ea1u);
    }
}

TEST_CASE("counter streams are pure functions of their key", "[rng]") {
    CHECK(rng::normal_at(42, 7, 3, 0) == rng::normal_at(42, 7, 3, 0));
    CHECK(rng::normal_at(42, 7, 3, 0) != rng::normal_at(42, 7, 3, 1));
    CHECK(rng::normal_at(42, 7, 3, 0) != rng::normal_at(42, 8, 3, 0));
    CHECK(rng::normal_at(42, 7, 3, 0) != rng::normal_at(43, 7, 3, 0));
    CHECK(rng::normal_at(42, 7, 3, 0, rng::Purpose::Increment) !=
          rng::normal_at(42, 7, 3, 0, rng::Purpose::Probe));

    rng::Sequence s1(99, 5, rng::Purpose::JumpDraw);
    rng::Sequence s2(99, 5, rng::Purpose::JumpDraw);
    for (int i = 0; i < 10; ++i) CHECK(s1.uniform() == s2.uniform());
}

TEST_CASE("normal and uniform moments", "[rng]") {
    const std::size_t n = 200000;
    std::vector<double> zs(n), us(n);
    for (std::size_t i = 0; i < n; ++i) {
        zs[i] = rng::normal_at(2024, i, 0, 0);
        us[i] = rng::uniform_at(2024, i, 0, 0, rng::Purpose::Probe);
    }
    const auto z = mc::mean_se(zs);
    CHECK(std::abs(z.mean) < 4.0 * z.se);
    double var = 0.0;
    for (double x : zs) var += (x - z.mean) * (x - z.mean);
    var /= static_cast<double>(n - 1);
    CHECK(var == Catch::Approx(1.0).margin(0.02));

    const auto u = mc::mean_se(us);
    CHECK(u.mean == Catch::Approx(0.5).margin(4.0 * u.se + 1e-12));
    for (double x : us) {
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("poisson inversion matches the law", "[rng]") {
    const double lambda = 3.5;
    const std::size_t n = 100000;
    std::vector<double> ks(n);
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < n; ++i) {
        rng::Sequence seq(7, i, rng::Purpose::JumpDraw);
        const long k = seq.poisson(lambda);
        ks[i] = static_cast<double>(k);
        if (k == 0) ++zeros;
    }
    const auto m = mc::mean_se(ks);
    CHECK(m.mean == Catch::Approx(lambda).margin(4.0 * m.se));
    double var = 0.0;
    for (double x : ks) var += (x - m.mean) * (x - m.mean);
    var /= static_cast<double>(n - 1);
    CHECK(var == Catch::Approx(lambda).margin(0.15));
    const double p0 = static_cast<double>(zeros) / static_cast<double>(n);
    CHECK(p0 == Catch::Approx(std::exp(-lambda)).margin(4.0 * mc::binomial_se(p0, n) + 1e-6));
}

TEST_CASE("derived seeds do not collide", "[rng]") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 200; ++i) seen.insert(rng::derive_seed(123456789, i));
    CHECK(seen.size() == 200);
}
