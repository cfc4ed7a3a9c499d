#pragma once

// Coupled path pairs for one diffusion semigroup: the synchronous coupling
// (shared noise, weights 1), the drift-forced coupling whose schedule
// eta_s = |x-y| e^{-Ks} / int_0^t e^{-2Ks} ds guarantees meeting by time t,
// and the Girsanov coupling behind the log-Harnack bound, with weight
// process R accumulated in the log domain and frozen at the coupling time.
//
// Discretisation needs a meeting band: paths are declared coupled when
// |X-Y| <= max(10 h (1 + |Z|), 1e-6), and an overshoot guard glues a path
// whenever one forced Euler step could jump past the partner. Overshoot
// gluings are counted and reported; they are the artifact of the grid, not
// of the construction.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "couplab/mc.hpp"
#include "couplab/rng.hpp"
#include "couplab/sde.hpp"

namespace couplab::couplings {

inline constexpr double kKDegenerate = 1e-8;  // |K| below this uses the K->0 limit

// eta_s = r e^{-Ks} / int_0^t e^{-2Ks} ds; the denominator is a constant.
struct EtaSchedule {
    double K = 0.0;
    double t_horizon = 0.0;
    double xy_dist = 0.0;
    std::vector<double> values;  // left-point samples on the step grid

    static double denom(double K, double t) {
        if (std::abs(K) < kKDegenerate) return t;
        return (1.0 - std::exp(-2.0 * K * t)) / (2.0 * K);
    }

    double eta(double s) const {
        return xy_dist * std::exp(-K * s) / denom(K, t_horizon);
    }

    static EtaSchedule make(double K, double t, double xy_dist, double h, long steps) {
        EtaSchedule e;
        e.K = K;
        e.t_horizon = t;
        e.xy_dist = xy_dist;
        e.values.resize(static_cast<std::size_t>(steps));
        for (long k = 0; k < steps; ++k) e.values[static_cast<std::size_t>(k)] = e.eta(k * h);
        return e;
    }

    // int_0^t e^{-Ks} eta_s ds must equal |x-y|: the identity that forces
    // the coupling time below t. Evaluated by quadrature, not algebra.
    double identity_residual() const {
        namespace bq = boost::math::quadrature;
        const double integral = bq::gauss_kronrod<double, 31>::integrate(
            [this](double s) { return std::exp(-K * s) * eta(s); }, 0.0, t_horizon, 8, 1e-12);
        return std::abs(integral - xy_dist);
    }
};

enum class CoupleKind { Synchronous, Forced, GirsanovTT };

struct CoupleOptions {
    bool store_paths = false;
};

// Paired trajectories with coupling-time record and weight process.
struct CouplingRun {
    sde::DiffusionSpec spec;
    CoupleKind kind = CoupleKind::Synchronous;
    double h = 0.0;
    double horizon = 0.0;
    long steps = 0;
    std::uint64_t seed = 0;
    std::vector<double> x0, y0;

    std::vector<long> coupling_step;  // first meeting step; -1 = never
    std::vector<double> log_weight;   // terminal log R (0 for synchronous)
    std::vector<double> x_terminal, y_terminal;
    std::vector<std::uint8_t> flagged;
    long n_flagged = 0;

    long n_band_glued = 0;       // overshoot-guard activations
    bool band_warning = false;   // >1% of paths glued by the guard
    bool coarse_warning = false; // >5% of paths failed to couple by the horizon

    EtaSchedule eta_schedule;  // populated for the forced coupling

    bool has_paths = false;
    std::vector<double> x_paths, y_paths;  // n_paths x (steps+1) x dim when stored

    long n_paths() const { return static_cast<long>(coupling_step.size()); }
    double weight(long p) const { return std::exp(log_weight[static_cast<std::size_t>(p)]); }

    double coupled_fraction() const {
        long c = 0;
        for (long s : coupling_step) c += (s >= 0);
        return static_cast<double>(c) / static_cast<double>(coupling_step.size());
    }

    const double* x_path_at(long p, long k) const {
        return x_paths.data() + (static_cast<std::size_t>(p) * (steps + 1) + k) * spec.dim;
    }
    const double* y_path_at(long p, long k) const {
        return y_paths.data() + (static_cast<std::size_t>(p) * (steps + 1) + k) * spec.dim;
    }
};

namespace detail {

struct CoupleConfig {
    CoupleKind kind;
    double K = 0.0;                 // schedule constant for Forced / GirsanovTT
    const EtaSchedule* eta = nullptr;
    std::vector<double> xi;         // GirsanovTT time scale on the grid
};

inline double norm(const double* v, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

// One coupled path pair. Returns false if flagged (non-finite state or
// sigma inversion failure).
template <class StepSink>
bool run_pair(const sde::DiffusionSpec& spec, const CoupleConfig& cfg,
              std::span<const double> x0, std::span<const double> y0, double h, long steps,
              std::uint64_t seed, std::uint64_t path, long& coupling_step, double& log_w,
              double* x_out, double* y_out, long& band_glue, StepSink&& sink) {
    const int d = spec.dim;
    const double sqrt_h = std::sqrt(h);
    double x[8], y[8], dB[8], zx[8], zy[8], sx[8], fy[8], delta[8], w[8], sw[8];
    for (int i = 0; i < d; ++i) {
        x[i] = x0[i];
        y[i] = y0[i];
    }
    coupling_step = -1;
    log_w = 0.0;
    band_glue = 0;
    bool coupled = false;

    for (long k = 0; k < steps; ++k) {
        sink(k, static_cast<const double*>(x), static_cast<const double*>(y));
        for (int c = 0; c < d; ++c)
            dB[c] = sqrt_h * rng::normal_at(seed, path, static_cast<std::uint32_t>(k),
                                            static_cast<std::uint32_t>(c));
        spec.drift.eval(x, zx);

        if (!coupled) {
            for (int i = 0; i < d; ++i) delta[i] = x[i] - y[i];
            const double dist = norm(delta, d);
            const double eps_couple = std::max(10.0 * h * (1.0 + spec.drift.norm_at(x)), 1e-6);
            if (dist <= eps_couple) {
                coupled = true;
                coupling_step = k;
            } else {
                spec.drift.eval(y, zy);
                double dlog = 0.0;
                bool overshoot = false;
                switch (cfg.kind) {
                    case CoupleKind::Synchronous:
                        for (int i = 0; i < d; ++i) fy[i] = zy[i];
                        break;
                    case CoupleKind::Forced: {
                        const double eta_k = cfg.eta->values[static_cast<std::size_t>(k)];
                        double udB = 0.0;
                        for (int i = 0; i < d; ++i) {
                            const double u = delta[i] / dist;
                            fy[i] = zy[i] + eta_k * u;
                            udB += u * dB[i];
                        }
                        dlog = -eta_k * udB - 0.5 * eta_k * eta_k * h;
                        overshoot = eta_k * h >= 0.5 * dist;
                        break;
                    }
                    case CoupleKind::GirsanovTT: {
                        const double xi_k = cfg.xi[static_cast<std::size_t>(k)];
                        if (!spec.diffusion.apply_inverse(x, delta, w)) return false;
                        if (xi_k <= 2.0 * h) {
                            overshoot = true;
                            break;
                        }
                        spec.diffusion.apply(y, w, sw);  // sigma(Y) sigma(X)^{-1} (X-Y)
                        double wdB = 0.0, wsq = 0.0;
                        for (int i = 0; i < d; ++i) {
                            fy[i] = zy[i] + sw[i] / xi_k;
                            wdB += w[i] * dB[i];
                            wsq += w[i] * w[i];
                        }
                        dlog = -wdB / xi_k - 0.5 * wsq / (xi_k * xi_k) * h;
                        const double force = norm(sw, d) / xi_k;
                        overshoot = overshoot || force * h >= 0.5 * dist;
                        break;
                    }
                }
                if (overshoot) {
                    coupled = true;
                    coupling_step = k;
                    band_glue = 1;
                } else {
                    log_w += dlog;
                    spec.diffusion.apply(y, dB, sw);
                    bool finite = true;
                    for (int i = 0; i < d; ++i) {
                        y[i] += fy[i] * h + sw[i];
                        finite = finite && std::isfinite(y[i]);
                    }
                    if (!finite) return false;
                }
            }
        }

        spec.diffusion.apply(x, dB, sx);
        bool finite = true;
        for (int i = 0; i < d; ++i) {
            x[i] += zx[i] * h + sx[i];
            finite = finite && std::isfinite(x[i]);
        }
        if (!finite) return false;
        if (coupled)
            for (int i = 0; i < d; ++i) y[i] = x[i];
    }
    sink(steps, static_cast<const double*>(x), static_cast<const double*>(y));
    for (int i = 0; i < d; ++i) {
        x_out[i] = x[i];
        y_out[i] = y[i];
    }
    return true;
}

inline CouplingRun run_coupling(const sde::DiffusionSpec& spec, const CoupleConfig& cfg,
                                std::span<const double> x0, std::span<const double> y0, double h,
                                double t, long n_paths, std::uint64_t seed,
                                const CoupleOptions& opts) {
    if (n_paths < 1) throw std::invalid_argument("coupling: n_paths must be >= 1");
    if (static_cast<int>(x0.size()) != spec.dim || static_cast<int>(y0.size()) != spec.dim)
        throw std::invalid_argument("coupling: start dimension mismatch");
    const long steps = sde::steps_for(h, t);
    const std::size_t d = static_cast<std::size_t>(spec.dim);

    CouplingRun run;
    run.spec = spec;
    run.kind = cfg.kind;
    run.h = h;
    run.horizon = t;
    run.steps = steps;
    run.seed = seed;
    run.x0.assign(x0.begin(), x0.end());
    run.y0.assign(y0.begin(), y0.end());
    run.coupling_step.assign(static_cast<std::size_t>(n_paths), -1);
    run.log_weight.assign(static_cast<std::size_t>(n_paths), 0.0);
    run.x_terminal.assign(static_cast<std::size_t>(n_paths) * d, 0.0);
    run.y_terminal.assign(static_cast<std::size_t>(n_paths) * d, 0.0);
    run.flagged.assign(static_cast<std::size_t>(n_paths), 0);

    std::vector<long> band(static_cast<std::size_t>(n_paths), 0);
    if (opts.store_paths) {
        const std::size_t total = 2 * static_cast<std::size_t>(n_paths) * (steps + 1) * d;
        if (total > 60'000'000)
            throw std::invalid_argument("coupling: stored paths too large for this run");
        run.has_paths = true;
        run.x_paths.assign(total / 2, 0.0);
        run.y_paths.assign(total / 2, 0.0);
    }

    mc::parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
        long cstep = -1, bg = 0;
        double lw = 0.0;
        auto sink_store = [&](long k, const double* xs, const double* ys) {
            if (!run.has_paths) return;
            double* xr = run.x_paths.data() + (p * (steps + 1) + static_cast<std::size_t>(k)) * d;
            double* yr = run.y_paths.data() + (p * (steps + 1) + static_cast<std::size_t>(k)) * d;
            for (std::size_t c = 0; c < d; ++c) {
                xr[c] = xs[c];
                yr[c] = ys[c];
            }
        };
        const bool ok =
            run_pair(spec, cfg, x0, y0, h, steps, seed, p, cstep, lw,
                     run.x_terminal.data() + p * d, run.y_terminal.data() + p * d, bg, sink_store);
        run.coupling_step[p] = cstep;
        run.log_weight[p] = lw;
        run.flagged[p] = ok ? 0 : 1;
        band[p] = bg;
    });
    for (std::size_t p = 0; p < static_cast<std::size_t>(n_paths); ++p) {
        run.n_flagged += run.flagged[p];
        run.n_band_glued += band[p];
    }
    if (static_cast<double>(run.n_flagged) > 0.01 * static_cast<double>(n_paths))
        throw std::runtime_error("coupling: more than 1% of paths flagged");
    run.band_warning =
        static_cast<double>(run.n_band_glued) > 0.01 * static_cast<double>(n_paths);
    if (cfg.kind != CoupleKind::Synchronous)
        run.coarse_warning = run.coupled_fraction() < 0.95;
    return run;
}

}  // namespace detail

// Both components driven by the same Brownian increments; weights stay 1.
inline CouplingRun couple_synchronous(const sde::DiffusionSpec& spec, std::span<const double> x0,
                                      std::span<const double> y0, double h, double t,
                                      long n_paths, std::uint64_t seed,
                                      const CoupleOptions& opts = {}) {
    detail::CoupleConfig cfg;
    cfg.kind = CoupleKind::Synchronous;
    return detail::run_coupling(spec, cfg, x0, y0, h, t, n_paths, seed, opts);
}

// Y carries the extra drift eta_s (X-Y)/|X-Y|; requires sigma = I. The
// schedule constant is the drift-form K of the spec.
inline CouplingRun couple_forced(const sde::DiffusionSpec& spec, std::span<const double> x0,
                                 std::span<const double> y0, double h, double t, long n_paths,
                                 std::uint64_t seed, const CoupleOptions& opts = {}) {
    if (!spec.diffusion.is_identity())
        throw std::invalid_argument("couple_forced: requires constant identity diffusion");
    if (!std::isfinite(spec.k_claim_drift))
        throw std::invalid_argument("couple_forced: finite drift-form K required");
    if (!(t > 0.0)) throw std::invalid_argument("couple_forced: t must be positive");
    const long steps = sde::steps_for(h, t);
    double dist = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i) dist += (x0[i] - y0[i]) * (x0[i] - y0[i]);
    dist = std::sqrt(dist);

    detail::CoupleConfig cfg;
    cfg.kind = CoupleKind::Forced;
    cfg.K = spec.k_claim_drift;
    EtaSchedule eta = EtaSchedule::make(cfg.K, t, dist, h, steps);
    cfg.eta = &eta;
    CouplingRun run = detail::run_coupling(spec, cfg, x0, y0, h, t, n_paths, seed, opts);
    run.eta_schedule = std::move(eta);
    return run;
}

// Girsanov coupling with xi_s = (1 - e^{K(s-t)})/K (limit t-s as K -> 0);
// K is the HS-form constant. X_t = Y_t holds under the weighted measure.
inline CouplingRun couple_girsanov_tt(const sde::DiffusionSpec& spec, std::span<const double> x0,
                                      std::span<const double> y0, double h, double t,
                                      long n_paths, std::uint64_t seed,
                                      const CoupleOptions& opts = {}) {
    if (!(t > 0.0)) throw std::invalid_argument("couple_girsanov_tt: t must be positive");
    const long steps = sde::steps_for(h, t);
    detail::CoupleConfig cfg;
    cfg.kind = CoupleKind::GirsanovTT;
    cfg.K = spec.k_claim_hs;
    cfg.xi.resize(static_cast<std::size_t>(steps));
    for (long k = 0; k < steps; ++k) {
        const double s = k * h;
        cfg.xi[static_cast<std::size_t>(k)] =
            (std::abs(cfg.K) < kKDegenerate) ? (t - s)
                                             : (1.0 - std::exp(cfg.K * (s - t))) / cfg.K;
    }
    return detail::run_coupling(spec, cfg, x0, y0, h, t, n_paths, seed, opts);
}

struct TailCurve {
    std::vector<double> ts;
    std::vector<double> survive;  // P(T_{x,y} > t)
    std::vector<double> se;       // binomial standard error
};

// Empirical survival function of the coupling time on a grid.
inline TailCurve coupling_time_tail(const CouplingRun& run, std::span<const double> t_grid) {
    TailCurve c;
    const double n = static_cast<double>(run.n_paths());
    for (double t : t_grid) {
        long alive = 0;
        for (long p = 0; p < run.n_paths(); ++p) {
            const long cs = run.coupling_step[static_cast<std::size_t>(p)];
            const double tc = cs < 0 ? std::numeric_limits<double>::infinity()
                                     : static_cast<double>(cs) * run.h;
            alive += (tc > t);
        }
        const double frac = static_cast<double>(alive) / n;
        c.ts.push_back(t);
        c.survive.push_back(frac);
        c.se.push_back(mc::binomial_se(frac, static_cast<std::size_t>(run.n_paths())));
    }
    return c;
}

// Weighted survival P_{R dP}(T > t) for measure-changing couplings.
inline double weighted_uncoupled_fraction(const CouplingRun& run) {
    double sw = 0.0, s_unc = 0.0;
    for (long p = 0; p < run.n_paths(); ++p) {
        const double w = run.weight(p);
        sw += w;
        if (run.coupling_step[static_cast<std::size_t>(p)] < 0) s_unc += w;
    }
    return s_unc / sw;
}

}  // namespace couplab::couplings
