#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "couplab/couplings.hpp"
#include "couplab/mc.hpp"
#include "couplab/sde.hpp"

using namespace couplab;
using couplings::CoupleOptions;

namespace {

mc::MeanSe weight_stats(const couplings::CouplingRun& run) {
    std::vector<double> ws(static_cast<std::size_t>(run.n_paths()));
    for (long p = 0; p < run.n_paths(); ++p) ws[static_cast<std::size_t>(p)] = run.weight(p);
    return mc::mean_se(ws);
}

}  // namespace

TEST_CASE("eta schedule satisfies its defining identity", "[couplings]") {
    for (double K : {-2.0, -1.0, 0.0, 1.0}) {
        const auto eta = couplings::EtaSchedule::make(K, 1.0, 1.0, 1e-3, 1000);
        CHECK(eta.identity_residual() < 1e-8);
    }
    // K = 0 must hit the analytic limit eta_s = |x-y| / t
    const auto flat = couplings::EtaSchedule::make(0.0, 2.0, 3.0, 0.1, 20);
    for (double v : flat.values) CHECK(v == Catch::Approx(1.5).margin(1e-12));
}

TEST_CASE("equal starts couple at step zero with unit weight", "[couplings]") {
    const auto spec = sde::make_spec("ou", 1);
    const std::vector<double> x0{0.7};
    CoupleOptions opts;
    opts.store_paths = true;
    const auto run = couplings::couple_forced(spec, x0, x0, 0.01, 0.5, 100, 31, opts);
    for (long p = 0; p < run.n_paths(); ++p) {
        CHECK(run.coupling_step[static_cast<std::size_t>(p)] == 0);
        CHECK(run.weight(p) == 1.0);
        for (long k = 0; k <= run.steps; ++k)
            CHECK(run.x_path_at(p, k)[0] == run.y_path_at(p, k)[0]);
    }
    const auto tail = couplings::coupling_time_tail(run, std::vector<double>{0.1, 0.25, 0.5});
    for (double s : tail.survive) CHECK(s == 0.0);
}

TEST_CASE("synchronous brownian coupling never meets", "[couplings]") {
    const auto spec = sde::make_spec("bm", 1);
    const auto run = couplings::couple_synchronous(spec, std::vector<double>{1.0},
                                                   std::vector<double>{0.0}, 1e-3, 1.0, 500, 77);
    CHECK(run.coupled_fraction() == 0.0);
    for (long p = 0; p < run.n_paths(); ++p) {
        CHECK(run.weight(p) == 1.0);
        CHECK(run.x_terminal[static_cast<std::size_t>(p)] -
                  run.y_terminal[static_cast<std::size_t>(p)] ==
              Catch::Approx(1.0).margin(1e-12));
    }
    const auto tail = couplings::coupling_time_tail(run, std::vector<double>{0.5, 1.0});
    for (double s : tail.survive) CHECK(s == 1.0);
}

TEST_CASE("synchronous ou coupling obeys the hs-form contraction", "[couplings]") {
    const auto spec = sde::make_spec("ou", 1);
    const double h = 1e-3, t = 2.0;
    const auto run = couplings::couple_synchronous(spec, std::vector<double>{1.0},
                                                   std::vector<double>{0.0}, h, t, 400, 5);
    std::vector<double> d2(static_cast<std::size_t>(run.n_paths()));
    for (long p = 0; p < run.n_paths(); ++p) {
        const double d = run.x_terminal[static_cast<std::size_t>(p)] -
                         run.y_terminal[static_cast<std::size_t>(p)];
        d2[static_cast<std::size_t>(p)] = d * d;
    }
    const auto m = mc::mean_se(d2);
    CHECK(m.mean <= std::exp(spec.k_claim_hs * t) * (1.0 + 10.0 * h));
}

TEST_CASE("forced brownian coupling meets before the horizon", "[couplings]") {
    const auto spec = sde::make_spec("bm", 1);
    const double h = 1e-3, t = 1.0;
    const auto run = couplings::couple_forced(spec, std::vector<double>{1.0},
                                              std::vector<double>{0.0}, h, t, 2000, 1234);
    CHECK(run.coupled_fraction() >= 0.99);
    CHECK_FALSE(run.coarse_warning);
    CHECK(run.eta_schedule.identity_residual() < 1e-8);

    const auto w = weight_stats(run);
    CHECK(std::abs(w.mean - 1.0) < 4.0 * w.se);

    // second-moment consistency with the exponential bound entering the
    // power-Harnack proof, p = 2
    std::vector<double> r2(static_cast<std::size_t>(run.n_paths()));
    for (long p = 0; p < run.n_paths(); ++p)
        r2[static_cast<std::size_t>(p)] = run.weight(p) * run.weight(p);
    const auto m2 = mc::mean_se(r2);
    const double p_exp = 2.0;
    const double bound = p_exp / (p_exp - 1.0) * 1.0 / t;  // K = 0 limit
    CHECK(std::log(m2.mean) <= bound + 3.0 * m2.se / m2.mean);

    const auto tail = couplings::coupling_time_tail(run, std::vector<double>{t});
    CHECK(tail.survive[0] <= 0.01);
}

TEST_CASE("forced ou coupling meets and preserves the weighted marginal", "[couplings]") {
    const auto spec = sde::make_spec("ou", 1);
    const double h = 1e-3, t = 1.0;
    const long n = 5000;
    const auto run = couplings::couple_forced(spec, std::vector<double>{1.0},
                                              std::vector<double>{0.0}, h, t, n, 991);
    CHECK(run.coupled_fraction() >= 0.99);
    const auto w = weight_stats(run);
    CHECK(std::abs(w.mean - 1.0) < 4.0 * w.se);

    // E[R f(Y_t)] reproduces the semigroup from y0 = 0; exact mean is 0.
    std::vector<double> fy(static_cast<std::size_t>(n)), ws(static_cast<std::size_t>(n));
    for (long p = 0; p < n; ++p) {
        fy[static_cast<std::size_t>(p)] = run.y_terminal[static_cast<std::size_t>(p)];
        ws[static_cast<std::size_t>(p)] = run.weight(p);
    }
    const auto wm = mc::weighted_mean_se(fy, ws);
    CHECK(std::abs(wm.mean - 0.0) < 4.0 * wm.se + 0.01);
}

TEST_CASE("glue discipline holds on stored paths", "[couplings]") {
    const auto spec = sde::make_spec("ou", 2);
    CoupleOptions opts;
    opts.store_paths = true;
    const auto run = couplings::couple_forced(spec, std::vector<double>{1.0, 0.5},
                                              std::vector<double>{0.0, 0.0}, 1e-3, 1.0, 50, 404,
                                              opts);
    REQUIRE(run.has_paths);
    for (long p = 0; p < run.n_paths(); ++p) {
        const long cs = run.coupling_step[static_cast<std::size_t>(p)];
        REQUIRE(cs >= 0);
        for (long k = cs + 1; k <= run.steps; ++k) {
            CHECK(run.x_path_at(p, k)[0] == run.y_path_at(p, k)[0]);
            CHECK(run.x_path_at(p, k)[1] == run.y_path_at(p, k)[1]);
        }
    }
}

TEST_CASE("girsanov coupling respects the entropy bound", "[couplings]") {
    const auto spec = sde::make_spec("ou", 1);  // hs-form K = -2, lambda = 1
    const double h = 1e-3, t = 1.0;
    const long n = 5000;
    const auto run = couplings::couple_girsanov_tt(spec, std::vector<double>{1.0},
                                                   std::vector<double>{0.0}, h, t, n, 2023);
    const auto w = weight_stats(run);
    CHECK(std::abs(w.mean - 1.0) < 4.0 * w.se);
    CHECK(couplings::weighted_uncoupled_fraction(run) <= 0.01);

    std::vector<double> rlogr(static_cast<std::size_t>(n));
    for (long p = 0; p < n; ++p) {
        const double r = run.weight(p);
        rlogr[static_cast<std::size_t>(p)] = r * std::log(r);
    }
    const auto m = mc::mean_se(rlogr);
    const double K = spec.k_claim_hs, lambda = spec.lambda_claim;
    const double bound = K * 1.0 / (2.0 * lambda * (1.0 - std::exp(-K * t)));
    CHECK(bound == Catch::Approx(1.0 / (std::exp(2.0) - 1.0)).epsilon(1e-12));
    CHECK(m.mean <= bound + 3.0 * m.se);
}

TEST_CASE("girsanov coupling works with state-dependent sigma", "[couplings]") {
    const auto spec = sde::make_spec("ou_tanh_sigma", 1);
    const auto run = couplings::couple_girsanov_tt(spec, std::vector<double>{0.5},
                                                   std::vector<double>{-0.5}, 1e-3, 1.0, 2000,
                                                   808);
    CHECK(run.n_flagged == 0);
    const auto w = weight_stats(run);
    CHECK(std::abs(w.mean - 1.0) < 4.0 * w.se);
    CHECK(couplings::weighted_uncoupled_fraction(run) <= 0.02);
}

TEST_CASE("coupling runs are deterministic", "[couplings]") {
    const auto spec = sde::make_spec("ou", 1);
    const auto a = couplings::couple_girsanov_tt(spec, std::vector<double>{1.0},
                                                 std::vector<double>{0.0}, 1e-2, 1.0, 300, 6);
    const auto b = couplings::couple_girsanov_tt(spec, std::vector<double>{1.0},
                                                 std::vector<double>{0.0}, 1e-2, 1.0, 300, 6);
    CHECK(a.log_weight == b.log_weight);
    CHECK(a.coupling_step == b.coupling_step);
    CHECK(a.x_terminal == b.x_terminal);
}

TEST_CASE("forced coupling rejects non-identity diffusion", "[couplings]") {
    const auto spec = sde::make_spec("ou_tanh_sigma", 1);
    CHECK_THROWS_AS(couplings::couple_forced(spec, std::vector<double>{1.0},
                                             std::vector<double>{0.0}, 1e-2, 1.0, 10, 1),
                    std::invalid_argument);
}
