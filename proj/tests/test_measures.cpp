#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "couplab/instances.hpp"
#include "couplab/measures.hpp"
#include "oracles.hpp"

using namespace couplab;
using measures::CostMatrix;
using measures::DiscreteMeasure;
using measures::Point;

namespace {

DiscreteMeasure two_point(double w0, const char* l0 = "1", const char* l1 = "2") {
    return DiscreteMeasure({Point{l0, 0.0}, Point{l1, 1.0}}, {w0, 1.0 - w0});
}

}  // namespace

TEST_CASE("discrete measure invariants are enforced", "[measures]") {
    CHECK_THROWS_AS(DiscreteMeasure({Point{"a", {}}, Point{"b", {}}}, {0.5, 0.6}),
                    std::invalid_argument);
    CHECK_THROWS_AS(DiscreteMeasure({Point{"a", {}}, Point{"b", {}}}, {1.2, -0.2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(DiscreteMeasure({Point{"a", {}}, Point{"a", {}}}, {0.5, 0.5}),
                    std::invalid_argument);
    CHECK_NOTHROW(DiscreteMeasure({Point{"a", {}}, Point{"b", {}}}, {0.5, 0.5}));
}

TEST_CASE("wasserstein_lp identity and dirac cases", "[measures]") {
    const auto mu = two_point(0.3);
    const auto res = measures::wasserstein_lp(mu, mu, CostMatrix::discrete(2), 1.0);
    CHECK(res.value == Catch::Approx(0.0).margin(1e-12));
    CHECK(res.plan.off_diagonal_mass() == Catch::Approx(0.0).margin(1e-12));
    res.plan.validate();

    const auto da = two_point(1.0);
    const auto db = two_point(0.0);
    const auto r2 = measures::wasserstein_lp(da, db, CostMatrix::discrete(2), 1.0);
    CHECK(r2.value == Catch::Approx(1.0).margin(1e-12));
    CHECK(r2.plan.at(0, 1) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("two-point instance solves to the hand value", "[measures]") {
    const auto mu = two_point(0.7);
    const auto nu = two_point(0.4);
    const auto res = measures::wasserstein_lp(mu, nu, CostMatrix::discrete(2), 1.0);
    CHECK(res.value == Catch::Approx(0.3).margin(1e-12));
    res.plan.validate();

    const auto dual = measures::kantorovich_dual(mu, nu, CostMatrix::discrete(2), 1.0);
    CHECK(dual.value == Catch::Approx(0.3).margin(1e-10));
    dual.cert.validate(CostMatrix::discrete(2));
}

TEST_CASE("simplex agrees with the basis-enumeration oracle", "[measures]") {
    for (std::uint64_t idx = 0; idx < 30; ++idx) {
        const std::size_t n = 2 + static_cast<std::size_t>(idx % 3);
        const std::size_t m = 2 + static_cast<std::size_t>((idx / 3) % 3);
        const auto mu = instances::random_measure(11, idx, n, false);
        const auto nu = instances::random_measure(12, idx, m, false);
        const auto cost = instances::random_cost(13, idx, n, m);
        const auto res = measures::wasserstein_lp(mu, nu, cost, 1.0);
        const double oracle = oracles::transport_min_cost(mu.weights, nu.weights, cost.entries);
        CHECK(res.value_pow == Catch::Approx(oracle).margin(1e-9));
        res.plan.validate();
    }
}

TEST_CASE("strong duality and certificate feasibility on random instances", "[measures]") {
    for (std::uint64_t idx = 0; idx < 50; ++idx) {
        const std::size_t n = 2 + static_cast<std::size_t>(idx % 5);
        const std::size_t m = 2 + static_cast<std::size_t>((idx / 5) % 5);
        for (double p : {1.0, 2.0}) {
            const auto mu = instances::random_measure(21, idx, n, false);
            const auto nu = instances::random_measure(22, idx, m, false);
            const auto cost = instances::random_cost(23, idx, n, m);
            const auto primal = measures::wasserstein_lp(mu, nu, cost, p);
            const auto dual = measures::kantorovich_dual(mu, nu, cost, p);
            CHECK(dual.value <= primal.value_pow + 1e-8);  // weak duality
            CHECK(std::abs(primal.value_pow - dual.value) < 1e-8);
            dual.cert.validate(cost);
            CHECK(*std::min_element(dual.cert.g_values.begin(), dual.cert.g_values.end()) ==
                  Catch::Approx(0.0).margin(1e-12));
        }
    }
}

TEST_CASE("hahn coupling matches the lp route for discrete cost", "[measures]") {
    const auto mu = two_point(0.7);
    const auto nu = two_point(0.4);
    const auto tv = measures::wasserstein_coupling_tv(mu, nu);
    CHECK(tv.tv_half == Catch::Approx(0.3).margin(1e-15));
    CHECK(tv.plan.at(0, 1) == Catch::Approx(0.3).margin(1e-15));
    CHECK(tv.plan.at(1, 0) == Catch::Approx(0.0).margin(1e-15));
    tv.plan.validate();

    for (std::uint64_t idx = 0; idx < 40; ++idx) {
        const std::size_t n = 2 + static_cast<std::size_t>(idx % 5);
        const auto a = instances::random_measure(31, idx, n, false);
        const auto b = instances::reweighted(a, 31, idx);
        const auto tvr = measures::wasserstein_coupling_tv(a, b);
        tvr.plan.validate();
        CHECK(tvr.plan.off_diagonal_mass() == Catch::Approx(tvr.tv_half).margin(1e-10));
        for (double p : {1.0, 2.0}) {
            const auto lp = measures::wasserstein_lp(a, b, CostMatrix::discrete(n), p);
            CHECK(lp.value_pow == Catch::Approx(tvr.tv_half).margin(1e-10));
            CHECK(measures::transport_cost(tvr.plan, CostMatrix::discrete(n), p) ==
                  Catch::Approx(lp.value_pow).margin(1e-10));
        }
    }
}

TEST_CASE("triangle inequality for metric cost", "[measures]") {
    for (std::uint64_t idx = 0; idx < 25; ++idx) {
        const std::size_t n = 3 + static_cast<std::size_t>(idx % 4);
        const auto a = instances::random_measure(41, idx, n, true);
        const auto b = instances::reweighted(a, 42, idx);
        const auto c = instances::reweighted(a, 43, idx);
        const auto cost = CostMatrix::from_coords(a, a);
        REQUIRE(cost.metric_flag);
        for (double p : {1.0, 2.0}) {
            const double ab = measures::wasserstein_lp(a, b, cost, p).value;
            const double bc = measures::wasserstein_lp(b, c, cost, p).value;
            const double ac = measures::wasserstein_lp(a, c, cost, p).value;
            CHECK(ac <= ab + bc + 1e-8);
        }
    }
}

TEST_CASE("every coupling upper-bounds the lp optimum", "[measures]") {
    for (std::uint64_t idx = 0; idx < 20; ++idx) {
        const std::size_t n = 2 + static_cast<std::size_t>(idx % 4);
        const std::size_t m = 2 + static_cast<std::size_t>((idx / 4) % 4);
        const auto mu = instances::random_measure(51, idx, n, false);
        const auto nu = instances::random_measure(52, idx, m, false);
        const auto cost = instances::random_cost(53, idx, n, m);
        const auto lp = measures::wasserstein_lp(mu, nu, cost, 1.0);
        // product coupling is always feasible
        measures::CouplingMatrix prod;
        prod.row_marginal = mu;
        prod.col_marginal = nu;
        prod.entries.resize(n * m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                prod.at(i, j) = mu.weights[i] * nu.weights[j];
        prod.validate();
        CHECK(measures::transport_cost(prod, cost, 1.0) >= lp.value_pow - 1e-10);
    }
}

TEST_CASE("quantile coupling is optimal for squared distance", "[measures]") {
    const auto id = DiscreteMeasure::uniform_on({0.0, 1.0});
    const auto same = measures::monotone_map_1d(id, id);
    CHECK(same.cost2 == Catch::Approx(0.0).margin(1e-15));

    const auto lo = DiscreteMeasure::uniform_on({0.0, 1.0});
    const auto hi = DiscreteMeasure::uniform_on({2.0, 3.0});
    const auto res = measures::monotone_map_1d(lo, hi);
    CHECK(res.cost2 == Catch::Approx(2.0).margin(1e-12));
    CHECK(res.plan.at(0, 0) == Catch::Approx(0.5).margin(1e-12));  // 0 -> 2
    CHECK(res.plan.at(1, 1) == Catch::Approx(0.5).margin(1e-12));  // 1 -> 3
    // the crossing bijection costs sqrt(5) > 2
    CHECK(std::sqrt(0.5 * 9.0 + 0.5 * 1.0) > res.cost2);

    const auto base = DiscreteMeasure::uniform_on({0.0, 1.0, 2.0});
    const auto shifted = DiscreteMeasure::uniform_on({5.0, 6.0, 7.0});
    CHECK(measures::monotone_map_1d(base, shifted).cost2 == Catch::Approx(5.0).margin(1e-12));

    for (std::uint64_t idx = 0; idx < 30; ++idx) {
        const std::size_t n = 2 + static_cast<std::size_t>(idx % 7);
        const auto mu = instances::random_measure(61, idx, n, true);
        const auto nu = instances::random_measure(62, idx, n, true);
        const auto q = measures::monotone_map_1d(mu, nu);
        q.plan.validate();
        const auto lp = measures::wasserstein_lp(mu, nu, CostMatrix::from_coords(mu, nu), 2.0);
        CHECK(q.cost2 == Catch::Approx(lp.value).margin(1e-8));
    }
}

TEST_CASE("fkg inequality", "[measures]") {
    const auto mu = DiscreteMeasure::uniform_on({0.0, 1.0});

    SECTION("identity pair on the uniform two-point measure") {
        const auto r = measures::fkg_check(mu, mu, {0.0, 1.0}, {0.0, 1.0});
        CHECK(r.lhs == Catch::Approx(1.0));
        CHECK(r.rhs == Catch::Approx(0.5));
        CHECK(r.holds);
    }
    SECTION("constant function gives equality") {
        const auto nu = two_point(0.4);
        const auto mu2 = two_point(0.8);
        const auto r = measures::fkg_check(mu2, nu, {3.0, 3.0}, {0.0, 1.0});
        CHECK(r.lhs == Catch::Approx(r.rhs).margin(1e-14));
        CHECK(r.holds);
    }
    SECTION("non-monotone input is rejected") {
        CHECK_THROWS_AS(measures::fkg_check(mu, mu, {1.0, 0.0}, {0.0, 1.0}),
                        std::invalid_argument);
    }
    SECTION("random monotone battery") {
        for (std::uint64_t idx = 0; idx < 100; ++idx) {
            const std::size_t n = 2 + static_cast<std::size_t>(idx % 6);
            const auto a = instances::random_measure(71, idx, n, true);
            const auto b = instances::reweighted(a, 72, idx);
            const auto f = instances::random_monotone(73, idx, n, -1.0, 0.7);
            const auto g = instances::random_monotone(74, idx, n, -0.5, 1.3);
            const auto r = measures::fkg_check(a, b, f, g);
            CHECK(r.holds);
        }
    }
}

TEST_CASE("input errors are reported", "[measures]") {
    const auto mu = two_point(0.5);
    const auto nu3 = DiscreteMeasure::uniform_on({0.0, 1.0, 2.0});
    CHECK_THROWS_AS(measures::wasserstein_lp(mu, nu3, CostMatrix::discrete(2), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(measures::wasserstein_lp(mu, mu, CostMatrix::discrete(2), 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(measures::wasserstein_coupling_tv(mu, nu3), std::invalid_argument);
    const auto no_coord = DiscreteMeasure({Point{"a", {}}, Point{"b", {}}}, {0.5, 0.5});
    CHECK_THROWS_AS(measures::monotone_map_1d(no_coord, no_coord), std::invalid_argument);
}
