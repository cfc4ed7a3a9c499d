#pragma once

// Seeded Euler-Maruyama simulation of d-dimensional diffusions
// dX = Z(X) dt + sigma(X) dB, plus probes for the one-sided dissipativity
// conditions the coupling estimates depend on.
//
// Two dissipativity conventions coexist and are never mixed:
//   drift form:  <Z(x)-Z(y), x-y> <= K |x-y|^2
//   hs form:     |sigma(x)-sigma(y)|_HS^2 + 2<x-y, Z(x)-Z(y)> <= K |x-y|^2
// The OU catalogue entry has K = -1 under the first and K = -2 under the
// second; each estimator reads the claim matching its own inequality.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "couplab/mc.hpp"
#include "couplab/rng.hpp"

namespace couplab::sde {

// Drift catalogue: configs stay pure data, evaluation never allocates.
struct Drift {
    enum class Kind { Zero, Linear, SinLinear };
    Kind kind = Kind::Zero;
    int dim = 1;
    std::vector<double> A;  // row-major dim*dim, Linear / SinLinear
    std::vector<double> b;  // offset, Linear
    double eps = 0.0;       // SinLinear perturbation size

    void eval(const double* x, double* out) const {
        switch (kind) {
            case Kind::Zero:
                for (int i = 0; i < dim; ++i) out[i] = 0.0;
                break;
            case Kind::Linear:
                for (int i = 0; i < dim; ++i) {
                    double s = b.empty() ? 0.0 : b[i];
                    const double* row = A.data() + i * dim;
                    for (int j = 0; j < dim; ++j) s += row[j] * x[j];
                    out[i] = s;
                }
                break;
            case Kind::SinLinear:
                for (int i = 0; i < dim; ++i) {
                    double s = eps * std::sin(x[i]);
                    const double* row = A.data() + i * dim;
                    for (int j = 0; j < dim; ++j) s += row[j] * x[j];
                    out[i] = s;
                }
                break;
        }
    }

    // (grad_v Z)(x): Jacobian applied to direction v.
    void jacobian_apply(const double* x, const double* v, double* out) const {
        switch (kind) {
            case Kind::Zero:
                for (int i = 0; i < dim; ++i) out[i] = 0.0;
                break;
            case Kind::Linear:
                for (int i = 0; i < dim; ++i) {
                    double s = 0.0;
                    const double* row = A.data() + i * dim;
                    for (int j = 0; j < dim; ++j) s += row[j] * v[j];
                    out[i] = s;
                }
                break;
            case Kind::SinLinear:
                for (int i = 0; i < dim; ++i) {
                    double s = eps * std::cos(x[i]) * v[i];
                    const double* row = A.data() + i * dim;
                    for (int j = 0; j < dim; ++j) s += row[j] * v[j];
                    out[i] = s;
                }
                break;
        }
    }

    bool differentiable() const { return true; }

    double norm_at(const double* x) const {
        double buf[8];
        eval(x, buf);
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += buf[i] * buf[i];
        return std::sqrt(s);
    }
};

struct Diffusion {
    enum class Kind { Identity, Constant, ScalarTanh };
    Kind kind = Kind::Identity;
    int dim = 1;
    std::vector<double> M;  // row-major, Constant
    double a = 0.0;         // ScalarTanh: sigma(x) = (1 + a * tanh(x_0)) * I

    void apply(const double* x, const double* w, double* out) const {
        switch (kind) {
            case Kind::Identity:
                for (int i = 0; i < dim; ++i) out[i] = w[i];
                break;
            case Kind::Constant:
                for (int i = 0; i < dim; ++i) {
                    double s = 0.0;
                    const double* row = M.data() + i * dim;
                    for (int j = 0; j < dim; ++j) s += row[j] * w[j];
                    out[i] = s;
                }
                break;
            case Kind::ScalarTanh: {
                const double f = 1.0 + a * std::tanh(x[0]);
                for (int i = 0; i < dim; ++i) out[i] = f * w[i];
                break;
            }
        }
    }

    bool apply_inverse(const double* x, const double* w, double* out) const {
        switch (kind) {
            case Kind::Identity:
                for (int i = 0; i < dim; ++i) out[i] = w[i];
                return true;
            case Kind::ScalarTanh: {
                const double f = 1.0 + a * std::tanh(x[0]);
                if (std::abs(f) < 1e-12) return false;
                for (int i = 0; i < dim; ++i) out[i] = w[i] / f;
                return true;
            }
            case Kind::Constant: {
                if (dim == 1) {
                    if (std::abs(M[0]) < 1e-12) return false;
                    out[0] = w[0] / M[0];
                    return true;
                }
                if (dim == 2) {
                    const double det = M[0] * M[3] - M[1] * M[2];
                    if (std::abs(det) < 1e-12) return false;
                    out[0] = (M[3] * w[0] - M[1] * w[1]) / det;
                    out[1] = (-M[2] * w[0] + M[0] * w[1]) / det;
                    return true;
                }
                return false;  // larger constant matrices: not in the catalogue
            }
        }
        return false;
    }

    double hs_dist_sq(const double* x, const double* y) const {
        switch (kind) {
            case Kind::Identity:
            case Kind::Constant:
                return 0.0;
            case Kind::ScalarTanh: {
                const double d = a * (std::tanh(x[0]) - std::tanh(y[0]));
                return d * d * static_cast<double>(dim);
            }
        }
        return 0.0;
    }

    bool is_identity() const { return kind == Kind::Identity; }

    // Lower bound on the spectrum of sigma* sigma over the state space.
    double ellipticity_floor() const {
        switch (kind) {
            case Kind::Identity:
                return 1.0;
            case Kind::ScalarTanh:
                return (1.0 - std::abs(a)) * (1.0 - std::abs(a));
            case Kind::Constant: {
                if (dim == 1) return M[0] * M[0];
                if (dim == 2) {
                    // smallest singular value squared of a 2x2 matrix
                    const double a11 = M[0], a12 = M[1], a21 = M[2], a22 = M[3];
                    const double t = a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22;
                    const double det = a11 * a22 - a12 * a21;
                    const double disc = std::sqrt(std::max(0.0, t * t - 4.0 * det * det));
                    return 0.5 * (t - disc);
                }
                return 0.0;
            }
        }
        return 0.0;
    }
};

struct DiffusionSpec {
    std::string id;
    int dim = 1;
    Drift drift;
    Diffusion diffusion;
    double k_claim_drift = 0.0;  // <Z(x)-Z(y), x-y> <= K |x-y|^2
    double k_claim_hs = 0.0;     // HS-augmented form
    double lambda_claim = 1.0;   // sigma* sigma >= lambda I
};

// Fixed catalogue, referenced by id from configs.
inline DiffusionSpec make_spec(const std::string& id, int dim) {
    if (dim < 1 || dim > 8) throw std::invalid_argument("make_spec: dim must be in 1..8");
    DiffusionSpec s;
    s.id = id;
    s.dim = dim;
    s.drift.dim = dim;
    s.diffusion.dim = dim;
    if (id == "bm") {
        s.drift.kind = Drift::Kind::Zero;
        s.k_claim_drift = 0.0;
        s.k_claim_hs = 0.0;
    } else if (id == "ou") {
        s.drift.kind = Drift::Kind::Linear;
        s.drift.A.assign(static_cast<std::size_t>(dim) * dim, 0.0);
        for (int i = 0; i < dim; ++i) s.drift.A[static_cast<std::size_t>(i) * dim + i] = -1.0;
        s.k_claim_drift = -1.0;
        s.k_claim_hs = -2.0;
    } else if (id == "ou_sin") {
        // bounded smooth perturbation of the OU drift
        s.drift.kind = Drift::Kind::SinLinear;
        s.drift.eps = 0.1;
        s.drift.A.assign(static_cast<std::size_t>(dim) * dim, 0.0);
        for (int i = 0; i < dim; ++i) s.drift.A[static_cast<std::size_t>(i) * dim + i] = -1.0;
        s.k_claim_drift = -0.9;
        s.k_claim_hs = -1.8;
    } else if (id == "ou_tanh_sigma") {
        s.drift.kind = Drift::Kind::Linear;
        s.drift.A.assign(static_cast<std::size_t>(dim) * dim, 0.0);
        for (int i = 0; i < dim; ++i) s.drift.A[static_cast<std::size_t>(i) * dim + i] = -1.0;
        s.diffusion.kind = Diffusion::Kind::ScalarTanh;
        s.diffusion.a = 0.25;
        s.k_claim_drift = -1.0;
        s.k_claim_hs = -2.0 + 0.0625 * static_cast<double>(dim);
        s.lambda_claim = 0.5625;
        return s;
    } else {
        throw std::invalid_argument("make_spec: unknown spec id '" + id + "'");
    }
    s.lambda_claim = 1.0;
    return s;
}

// One Euler-Maruyama path. The visitor sees left-point data:
// visit(step, x_k, dB_k) before the state update. Returns false if the
// path left the finite range (caller flags it).
template <class Visitor>
bool run_euler_path(const DiffusionSpec& spec, std::span<const double> start, double h,
                    long steps, std::uint64_t seed, std::uint64_t path, std::span<double> state,
                    Visitor&& visit) {
    const int d = spec.dim;
    const double sqrt_h = std::sqrt(h);
    double dB[8], zbuf[8], sbuf[8];
    if (d > 8) throw std::invalid_argument("run_euler_path: dim > 8 not supported");
    for (int i = 0; i < d; ++i) state[i] = start[i];
    for (long k = 0; k < steps; ++k) {
        for (int c = 0; c < d; ++c)
            dB[c] = sqrt_h * rng::normal_at(seed, path, static_cast<std::uint32_t>(k),
                                            static_cast<std::uint32_t>(c));
        visit(k, static_cast<const double*>(state.data()), static_cast<const double*>(dB));
        spec.drift.eval(state.data(), zbuf);
        spec.diffusion.apply(state.data(), dB, sbuf);
        bool finite = true;
        for (int i = 0; i < d; ++i) {
            state[i] += zbuf[i] * h + sbuf[i];
            finite = finite && std::isfinite(state[i]);
        }
        if (!finite) return false;
    }
    return true;
}

// Seeded ensemble of trajectories. states holds n_paths x (steps+1) x dim;
// increments holds the Brownian increments actually consumed.
struct PathBundle {
    DiffusionSpec spec;
    double step = 0.0;
    double horizon = 0.0;
    long steps = 0;
    long n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<double> start;
    std::vector<double> states;
    std::vector<double> increments;
    std::vector<std::uint8_t> flagged;
    long n_flagged = 0;

    const double* state_at(long path, long k) const {
        return states.data() + (static_cast<std::size_t>(path) * (steps + 1) + k) * spec.dim;
    }
    const double* terminal(long path) const { return state_at(path, steps); }
};

inline long steps_for(double h, double t) {
    if (!(h > 0.0) || !(t >= h)) throw std::invalid_argument("simulate: need h > 0 and t >= h");
    const double raw = t / h;
    const long steps = static_cast<long>(std::llround(raw));
    if (std::abs(static_cast<double>(steps) * h - t) > 1e-9 * std::max(1.0, t))
        throw std::invalid_argument("simulate: horizon must be an integer number of steps");
    return steps;
}

inline PathBundle simulate(const DiffusionSpec& spec, std::span<const double> start, double h,
                           double t, long n_paths, std::uint64_t seed) {
    if (n_paths < 1) throw std::invalid_argument("simulate: n_paths must be >= 1");
    if (static_cast<std::size_t>(start.size()) != static_cast<std::size_t>(spec.dim))
        throw std::invalid_argument("simulate: start dimension mismatch");
    const long steps = steps_for(h, t);
    const std::size_t d = static_cast<std::size_t>(spec.dim);
    const std::size_t total = static_cast<std::size_t>(n_paths) * (steps + 1) * d +
                              static_cast<std::size_t>(n_paths) * steps * d;
    if (total > 60'000'000)
        throw std::invalid_argument("simulate: bundle too large; use a streaming estimator");

    PathBundle b;
    b.spec = spec;
    b.step = h;
    b.horizon = t;
    b.steps = steps;
    b.n_paths = n_paths;
    b.seed = seed;
    b.start.assign(start.begin(), start.end());
    b.states.assign(static_cast<std::size_t>(n_paths) * (steps + 1) * d, 0.0);
    b.increments.assign(static_cast<std::size_t>(n_paths) * steps * d, 0.0);
    b.flagged.assign(static_cast<std::size_t>(n_paths), 0);

    mc::parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
        double* row = b.states.data() + p * (steps + 1) * d;
        double* inc = b.increments.data() + p * steps * d;
        double state[8];
        const bool ok = run_euler_path(
            spec, start, h, steps, seed, p, std::span<double>(state, d),
            [&](long k, const double* x, const double* dB) {
                for (std::size_t c = 0; c < d; ++c) {
                    row[static_cast<std::size_t>(k) * d + c] = x[c];
                    inc[static_cast<std::size_t>(k) * d + c] = dB[c];
                }
            });
        for (std::size_t c = 0; c < d; ++c) row[static_cast<std::size_t>(steps) * d + c] = state[c];
        b.flagged[p] = ok ? 0 : 1;
    });
    for (auto f : b.flagged) b.n_flagged += f;
    if (static_cast<double>(b.n_flagged) > 0.01 * static_cast<double>(n_paths))
        throw std::runtime_error("simulate: more than 1% of paths diverged");
    return b;
}

struct KProbeResult {
    double k_hat_drift = 0.0;
    double k_hat_hs = 0.0;
    bool pass_drift = false;
    bool pass_hs = false;
};

// Empirical one-sided constants over sampled pairs in a ball. The sup over
// pairs is a lower bound for the true constant; pass compares against the
// spec's claims with a 1e-6 slack.
inline KProbeResult check_one_sided_K(const DiffusionSpec& spec, long n_probes, double radius,
                                      std::uint64_t seed) {
    if (n_probes < 1) throw std::invalid_argument("check_one_sided_K: n_probes must be >= 1");
    const int d = spec.dim;
    KProbeResult r;
    r.k_hat_drift = -std::numeric_limits<double>::infinity();
    r.k_hat_hs = -std::numeric_limits<double>::infinity();
    std::vector<double> x(d), y(d), zx(d), zy(d);
    for (long p = 0; p < n_probes; ++p) {
        rng::Sequence seq(seed, static_cast<std::uint64_t>(p), rng::Purpose::Probe);
        auto draw_in_ball = [&](std::vector<double>& out) {
            double norm = 0.0;
            for (int i = 0; i < d; ++i) {
                out[i] = seq.normal();
                norm += out[i] * out[i];
            }
            norm = std::sqrt(norm);
            const double rad = radius * std::pow(seq.uniform(), 1.0 / static_cast<double>(d));
            for (int i = 0; i < d; ++i) out[i] = (norm > 0.0) ? out[i] / norm * rad : 0.0;
        };
        draw_in_ball(x);
        draw_in_ball(y);
        double dist_sq = 0.0;
        for (int i = 0; i < d; ++i) dist_sq += (x[i] - y[i]) * (x[i] - y[i]);
        if (dist_sq < 1e-18) continue;
        spec.drift.eval(x.data(), zx.data());
        spec.drift.eval(y.data(), zy.data());
        double inner = 0.0;
        for (int i = 0; i < d; ++i) inner += (x[i] - y[i]) * (zx[i] - zy[i]);
        const double hs = spec.diffusion.hs_dist_sq(x.data(), y.data());
        r.k_hat_drift = std::max(r.k_hat_drift, inner / dist_sq);
        r.k_hat_hs = std::max(r.k_hat_hs, (hs + 2.0 * inner) / dist_sq);
    }
    r.pass_drift = r.k_hat_drift <= spec.k_claim_drift + 1e-6;
    r.pass_hs = r.k_hat_hs <= spec.k_claim_hs + 1e-6;
    return r;
}

}  // namespace couplab::sde
