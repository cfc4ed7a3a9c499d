#pragma once

// Small Monte Carlo helpers shared by the estimator modules.
//
// Parallelism discipline: per-path work is written into a slot indexed by
// the path, then reduced sequentially in path order. Results are therefore
// byte-identical no matter how many worker threads run.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace couplab::mc {

inline unsigned worker_count(std::size_t n_items) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(1, n_items)));
}

// Runs fn(i) for i in [0, n). fn must only touch state owned by item i.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = worker_count(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

// Sequential two-pass mean / standard error; fixed summation order.
inline MeanSe mean_se(std::span<const double> xs) {
    MeanSe r;
    r.n = xs.size();
    if (r.n == 0) return r;
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(r.n);
    if (r.n < 2) return r;
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - r.mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(r.n - 1);
    r.se = std::sqrt(var / static_cast<double>(r.n));
    return r;
}

// Weighted mean of f with weights w (used for Girsanov-reweighted laws),
// with a linearised standard error for the ratio sum(w f)/sum(w).
inline MeanSe weighted_mean_se(std::span<const double> fs, std::span<const double> ws) {
    if (fs.size() != ws.size()) throw std::invalid_argument("weighted_mean_se: size mismatch");
    MeanSe r;
    r.n = fs.size();
    if (r.n == 0) return r;
    double sw = 0.0, swf = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        sw += ws[i];
        swf += ws[i] * fs[i];
    }
    if (sw <= 0.0) throw std::runtime_error("weighted_mean_se: nonpositive total weight");
    r.mean = swf / sw;
    if (r.n < 2) return r;
    double ss = 0.0;
    const double wbar = sw / static_cast<double>(r.n);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const double d = ws[i] * (fs[i] - r.mean) / wbar;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(r.n - 1);
    r.se = std::sqrt(var / static_cast<double>(r.n));
    return r;
}

inline double binomial_se(double p_hat, std::size_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) / static_cast<double>(n));
}

}  // namespace couplab::mc
