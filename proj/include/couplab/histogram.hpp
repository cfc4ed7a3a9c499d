#pragma once

// Histogram estimate of the variation distance between two sampled laws
// (full-norm convention, values in [0, 2]).
//
// Binned TV never exceeds the true TV, so the estimator is safe inside
// upper-bound checks; the reported binning budget (density Lipschitz bound
// times bin width) covers the loss for two-sided comparisons. The raw
// sum |p_hat - q_hat| carries a positive sampling bias in near-empty bins;
// we subtract the plug-in expectation E|N(d, v)| - |d| per bin.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace couplab::histogram {

struct HistTv {
    double tv = 0.0;       // debiased estimate of sum_bins |P(bin) - Q(bin)|
    double se = 0.0;
    double bin_width = 0.0;
    long bins = 0;
    double binning_budget = 0.0;  // density_lip * bin_width
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& s, double q) {
    if (s.empty()) return 0.0;
    const double pos = q * static_cast<double>(s.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return s[lo] * (1.0 - frac) + s[hi] * frac;
}

// E|N(mu, v)| - |mu|: the expected inflation of |d_hat| under sampling noise.
inline double abs_noise_bias(double mu, double v) {
    if (v <= 0.0) return 0.0;
    const double s = std::sqrt(v);
    const double a = std::abs(mu);
    const double e_abs = a * std::erf(a / (s * std::numbers::sqrt2)) +
                         s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-a * a / (2.0 * v));
    return e_abs - a;
}

}  // namespace detail

// Freedman-Diaconis width on the pooled sample, clamped to a sane range.
inline double fd_bin_width(std::span<const double> xs, std::span<const double> ys) {
    std::vector<double> pooled;
    pooled.reserve(xs.size() + ys.size());
    pooled.insert(pooled.end(), xs.begin(), xs.end());
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    std::sort(pooled.begin(), pooled.end());
    const double iqr =
        detail::quantile_sorted(pooled, 0.75) - detail::quantile_sorted(pooled, 0.25);
    const double n = static_cast<double>(pooled.size());
    double w = 2.0 * iqr / std::cbrt(n);
    if (!(w > 0.0)) w = (pooled.back() - pooled.front()) / 64.0;
    if (!(w > 0.0)) w = 1.0;
    return w;
}

inline HistTv histogram_tv_1d(std::span<const double> xs, std::span<const double> ys,
                              std::span<const double> y_weights, double density_lip) {
    if (xs.empty() || ys.empty()) throw std::invalid_argument("histogram_tv_1d: empty sample");
    if (!y_weights.empty() && y_weights.size() != ys.size())
        throw std::invalid_argument("histogram_tv_1d: weight length mismatch");

    const double w = fd_bin_width(xs, ys);
    double lo = std::min(*std::min_element(xs.begin(), xs.end()),
                         *std::min_element(ys.begin(), ys.end()));
    double hi = std::max(*std::max_element(xs.begin(), xs.end()),
                         *std::max_element(ys.begin(), ys.end()));
    hi += 1e-9 * std::max(1.0, std::abs(hi));
    long bins = static_cast<long>(std::ceil((hi - lo) / w));
    bins = std::clamp<long>(bins, 8, 4096);
    const double width = (hi - lo) / static_cast<double>(bins);

    std::vector<double> p(static_cast<std::size_t>(bins), 0.0),
        q(static_cast<std::size_t>(bins), 0.0);
    auto bin_of = [&](double x) {
        long b = static_cast<long>((x - lo) / width);
        return static_cast<std::size_t>(std::clamp<long>(b, 0, bins - 1));
    };
    for (double x : xs) p[bin_of(x)] += 1.0;
    const double nx = static_cast<double>(xs.size());
    for (auto& v : p) v /= nx;

    double sw = 0.0, sw2 = 0.0;
    if (y_weights.empty()) {
        for (double y : ys) q[bin_of(y)] += 1.0;
        sw = static_cast<double>(ys.size());
        sw2 = sw;
    } else {
        for (std::size_t i = 0; i < ys.size(); ++i) {
            q[bin_of(ys[i])] += y_weights[i];
            sw += y_weights[i];
            sw2 += y_weights[i] * y_weights[i];
        }
        if (sw <= 0.0) throw std::invalid_argument("histogram_tv_1d: nonpositive total weight");
    }
    for (auto& v : q) v /= sw;
    const double n_eff_y = sw * sw / sw2;

    HistTv out;
    out.bin_width = width;
    out.bins = bins;
    out.binning_budget = density_lip * width;
    double raw = 0.0, bias = 0.0, var = 0.0;
    for (long b = 0; b < bins; ++b) {
        const double pb = p[static_cast<std::size_t>(b)], qb = q[static_cast<std::size_t>(b)];
        const double d = pb - qb;
        const double v = pb * (1.0 - pb) / nx + qb * (1.0 - qb) / n_eff_y;
        raw += std::abs(d);
        bias += detail::abs_noise_bias(d, v);
        var += v;
    }
    out.tv = std::max(0.0, raw - bias);
    out.se = std::sqrt(var);
    return out;
}

// 2-D variant on a product grid with per-axis Freedman-Diaconis widths.
inline HistTv histogram_tv_2d(std::span<const double> xs, std::span<const double> ys,
                              std::span<const double> y_weights, double density_lip) {
    if (xs.size() % 2 != 0 || ys.size() % 2 != 0)
        throw std::invalid_argument("histogram_tv_2d: samples must be (x0,x1) pairs");
    const std::size_t nx = xs.size() / 2, ny = ys.size() / 2;
    if (nx == 0 || ny == 0) throw std::invalid_argument("histogram_tv_2d: empty sample");
    if (!y_weights.empty() && y_weights.size() != ny)
        throw std::invalid_argument("histogram_tv_2d: weight length mismatch");

    std::vector<double> ax0(nx), ax1(nx), bx0(ny), bx1(ny);
    for (std::size_t i = 0; i < nx; ++i) {
        ax0[i] = xs[2 * i];
        ax1[i] = xs[2 * i + 1];
    }
    for (std::size_t i = 0; i < ny; ++i) {
        bx0[i] = ys[2 * i];
        bx1[i] = ys[2 * i + 1];
    }
    const double w0 = fd_bin_width(ax0, bx0) * 2.0;  // coarser grid in 2-D
    const double w1 = fd_bin_width(ax1, bx1) * 2.0;
    auto axis = [](const std::vector<double>& a, const std::vector<double>& b, double w,
                   double& lo, long& bins, double& width) {
        lo = std::min(*std::min_element(a.begin(), a.end()),
                      *std::min_element(b.begin(), b.end()));
        double hi = std::max(*std::max_element(a.begin(), a.end()),
                             *std::max_element(b.begin(), b.end()));
        hi += 1e-9 * std::max(1.0, std::abs(hi));
        bins = std::clamp<long>(static_cast<long>(std::ceil((hi - lo) / w)), 4, 128);
        width = (hi - lo) / static_cast<double>(bins);
    };
    double lo0, lo1, wd0, wd1;
    long b0, b1;
    axis(ax0, bx0, w0, lo0, b0, wd0);
    axis(ax1, bx1, w1, lo1, b1, wd1);

    const std::size_t cells = static_cast<std::size_t>(b0) * static_cast<std::size_t>(b1);
    std::vector<double> p(cells, 0.0), q(cells, 0.0);
    auto cell_of = [&](double x0, double x1) {
        const long i = std::clamp<long>(static_cast<long>((x0 - lo0) / wd0), 0, b0 - 1);
        const long j = std::clamp<long>(static_cast<long>((x1 - lo1) / wd1), 0, b1 - 1);
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(b1) +
               static_cast<std::size_t>(j);
    };
    for (std::size_t i = 0; i < nx; ++i) p[cell_of(ax0[i], ax1[i])] += 1.0;
    for (auto& v : p) v /= static_cast<double>(nx);
    double sw = 0.0, sw2 = 0.0;
    for (std::size_t i = 0; i < ny; ++i) {
        const double wgt = y_weights.empty() ? 1.0 : y_weights[i];
        q[cell_of(bx0[i], bx1[i])] += wgt;
        sw += wgt;
        sw2 += wgt * wgt;
    }
    for (auto& v : q) v /= sw;
    const double n_eff_y = sw * sw / sw2;

    HistTv out;
    out.bin_width = std::max(wd0, wd1);
    out.bins = static_cast<long>(cells);
    out.binning_budget = density_lip * (wd0 + wd1);
    double raw = 0.0, bias = 0.0, var = 0.0;
    for (std::size_t cidx = 0; cidx < cells; ++cidx) {
        const double d = p[cidx] - q[cidx];
        const double v =
            p[cidx] * (1.0 - p[cidx]) / static_cast<double>(nx) + q[cidx] * (1.0 - q[cidx]) / n_eff_y;
        raw += std::abs(d);
        bias += detail::abs_noise_bias(d, v);
        var += v;
    }
    out.tv = std::max(0.0, raw - bias);
    out.se = std::sqrt(var);
    return out;
}

// Exact variation distance between two 1-D Gaussians with equal variance,
// full-norm convention: 2 erf(|a-b| / (2 sigma sqrt(2))).
inline double gaussian_tv_equal_var(double mean_a, double mean_b, double sigma) {
    return 2.0 * std::erf(std::abs(mean_a - mean_b) / (2.0 * sigma * std::numbers::sqrt2));
}

}  // namespace couplab::histogram
