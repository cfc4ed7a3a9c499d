#pragma once

// Seeded random test instances for the transport suites. Generation is a
// pure function of (seed, index), so suites and tests can regenerate the
// exact same batch.

#include <cstdint>
#include <string>
#include <vector>

#include "couplab/measures.hpp"
#include "couplab/rng.hpp"

namespace couplab::instances {

inline measures::DiscreteMeasure random_measure(std::uint64_t seed, std::uint64_t idx,
                                                std::size_t n, bool with_coords) {
    rng::Sequence seq(seed, idx, rng::Purpose::Instance);
    std::vector<double> w(n);
    double sum = 0.0;
    for (auto& x : w) {
        x = 0.05 + seq.uniform();
        sum += x;
    }
    for (auto& x : w) x /= sum;
    std::vector<measures::Point> pts(n);
    double coord = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        coord += 0.1 + seq.uniform();
        pts[i].label = "p" + std::to_string(i);
        pts[i].coord = with_coords ? std::optional<double>(coord) : std::nullopt;
    }
    return measures::DiscreteMeasure(std::move(pts), std::move(w));
}

// Second measure on the same ground set (same labels and coordinates).
inline measures::DiscreteMeasure reweighted(const measures::DiscreteMeasure& base,
                                            std::uint64_t seed, std::uint64_t idx) {
    rng::Sequence seq(seed, idx ^ 0x9e3779b97f4a7c15ull, rng::Purpose::Instance);
    std::vector<double> w(base.size());
    double sum = 0.0;
    for (auto& x : w) {
        x = 0.05 + seq.uniform();
        sum += x;
    }
    for (auto& x : w) x /= sum;
    return measures::DiscreteMeasure(base.points, std::move(w));
}

inline measures::CostMatrix random_cost(std::uint64_t seed, std::uint64_t idx, std::size_t n,
                                        std::size_t m) {
    rng::Sequence seq(seed, idx ^ 0xc0ffee, rng::Purpose::Instance);
    std::vector<double> e(n * m);
    for (auto& c : e) c = 2.0 * seq.uniform();
    return measures::CostMatrix(n, m, std::move(e), false);
}

// Non-decreasing function values over n ordered points.
inline std::vector<double> random_monotone(std::uint64_t seed, std::uint64_t idx, std::size_t n,
                                           double start, double max_step) {
    rng::Sequence seq(seed, idx ^ 0xf00d, rng::Purpose::Instance);
    std::vector<double> f(n);
    double v = start + seq.uniform();
    for (std::size_t i = 0; i < n; ++i) {
        f[i] = v;
        v += max_step * seq.uniform();
    }
    return f;
}

}  // namespace couplab::instances
