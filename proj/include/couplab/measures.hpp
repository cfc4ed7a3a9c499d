#pragma once

// Exact optimal transport on finite ground sets: L^p Wasserstein values and
// plans, Kantorovich dual certificates, the Hahn-decomposition coupling for
// total variation, the 1-D quantile coupling, and the FKG product check.
//
// The LP core is a transportation simplex with Bland entering rule and
// lexicographic leaving rule, so solves are deterministic and cycle-free.
// Instances here are desk scale (n*m <= 64); see wasserstein_lp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace couplab::measures {

inline constexpr double kWeightSumTol = 1e-12;
inline constexpr double kMarginalTol = 1e-10;
inline constexpr double kDualFeasTol = 1e-10;
inline constexpr double kMetricTol = 1e-12;
inline constexpr double kDropTol = 1e-15;
inline constexpr double kSimplexTol = 1e-10;
inline constexpr std::size_t kMaxCells = 64;

struct Point {
    std::string label;
    std::optional<double> coord;
};

// Probability vector over a finite labeled ground set.
struct DiscreteMeasure {
    std::vector<Point> points;
    std::vector<double> weights;

    DiscreteMeasure() = default;

    DiscreteMeasure(std::vector<Point> pts, std::vector<double> w)
        : points(std::move(pts)), weights(std::move(w)) {
        validate();
    }

    // Convenience: labels "0","1",... with the given coordinates.
    static DiscreteMeasure from_coords(const std::vector<double>& xs,
                                       const std::vector<double>& w) {
        std::vector<Point> pts;
        pts.reserve(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            pts.push_back(Point{std::to_string(i), xs[i]});
        return DiscreteMeasure(std::move(pts), w);
    }

    static DiscreteMeasure uniform_on(const std::vector<double>& xs) {
        return from_coords(xs, std::vector<double>(xs.size(), 1.0 / static_cast<double>(xs.size())));
    }

    std::size_t size() const { return points.size(); }

    void validate() const {
        if (points.size() != weights.size())
            throw std::invalid_argument("DiscreteMeasure: points/weights length mismatch");
        if (points.empty()) throw std::invalid_argument("DiscreteMeasure: empty support");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("DiscreteMeasure: negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kWeightSumTol)
            throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = i + 1; j < points.size(); ++j)
                if (points[i].label == points[j].label)
                    throw std::invalid_argument("DiscreteMeasure: duplicate label " + points[i].label);
    }

    bool same_ground_set(const DiscreteMeasure& other) const {
        if (points.size() != other.points.size()) return false;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].label != other.points[i].label) return false;
            if (points[i].coord.has_value() != other.points[i].coord.has_value()) return false;
            if (points[i].coord && *points[i].coord != *other.points[i].coord) return false;
        }
        return true;
    }
};

// n x m matrix of nonnegative transport costs. metric_flag asserts the
// entries form a metric on a common ground set (checked at construction).
struct CostMatrix {
    std::size_t n = 0, m = 0;
    std::vector<double> entries;  // row-major
    bool metric_flag = false;

    CostMatrix() = default;

    CostMatrix(std::size_t n_, std::size_t m_, std::vector<double> e, bool metric = false)
        : n(n_), m(m_), entries(std::move(e)), metric_flag(metric) {
        if (entries.size() != n * m) throw std::invalid_argument("CostMatrix: size mismatch");
        for (double c : entries)
            if (!(c >= 0.0)) throw std::invalid_argument("CostMatrix: negative entry");
        if (metric_flag) check_metric();
    }

    double at(std::size_t i, std::size_t j) const { return entries[i * m + j]; }
    double& at(std::size_t i, std::size_t j) { return entries[i * m + j]; }

    static CostMatrix discrete(std::size_t n) {
        std::vector<double> e(n * n, 1.0);
        for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 0.0;
        return CostMatrix(n, n, std::move(e), true);
    }

    // |x_i - y_j| from the coordinates carried by two measures.
    static CostMatrix from_coords(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
        std::vector<double> e(mu.size() * nu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) {
            if (!mu.points[i].coord) throw std::invalid_argument("CostMatrix: missing coordinate");
            for (std::size_t j = 0; j < nu.size(); ++j) {
                if (!nu.points[j].coord) throw std::invalid_argument("CostMatrix: missing coordinate");
                e[i * nu.size() + j] = std::abs(*mu.points[i].coord - *nu.points[j].coord);
            }
        }
        const bool metric = mu.same_ground_set(nu);
        return CostMatrix(mu.size(), nu.size(), std::move(e), metric);
    }

  private:
    void check_metric() const {
        if (n != m) throw std::invalid_argument("CostMatrix: metric flag requires square matrix");
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(at(i, i)) > kMetricTol)
                throw std::invalid_argument("CostMatrix: metric diagonal must be 0");
            for (std::size_t j = 0; j < m; ++j) {
                if (std::abs(at(i, j) - at(j, i)) > kMetricTol)
                    throw std::invalid_argument("CostMatrix: metric must be symmetric");
                for (std::size_t k = 0; k < n; ++k)
                    if (at(i, j) > at(i, k) + at(k, j) + kMetricTol)
                        throw std::invalid_argument("CostMatrix: triangle inequality violated");
            }
        }
    }
};

// Joint probability matrix with fixed marginals (a transport plan).
struct CouplingMatrix {
    std::vector<double> entries;  // row-major, size n*m
    DiscreteMeasure row_marginal;
    DiscreteMeasure col_marginal;

    std::size_t rows() const { return row_marginal.size(); }
    std::size_t cols() const { return col_marginal.size(); }
    double at(std::size_t i, std::size_t j) const { return entries[i * cols() + j]; }
    double& at(std::size_t i, std::size_t j) { return entries[i * cols() + j]; }

    void validate() const {
        const std::size_t n = rows(), m = cols();
        if (entries.size() != n * m) throw std::invalid_argument("CouplingMatrix: size mismatch");
        for (double e : entries)
            if (e < -kMarginalTol) throw std::invalid_argument("CouplingMatrix: negative entry");
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) s += at(i, j);
            if (std::abs(s - row_marginal.weights[i]) > kMarginalTol)
                throw std::invalid_argument("CouplingMatrix: row marginal mismatch");
        }
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += at(i, j);
            if (std::abs(s - col_marginal.weights[j]) > kMarginalTol)
                throw std::invalid_argument("CouplingMatrix: column marginal mismatch");
        }
    }

    double off_diagonal_mass() const {
        double s = 0.0;
        for (std::size_t i = 0; i < rows(); ++i)
            for (std::size_t j = 0; j < cols(); ++j)
                if (i != j) s += at(i, j);
        return s;
    }
};

// Feasible Kantorovich potentials: f(x) <= g(y) + cost(x,y)^p entrywise.
struct DualCertificate {
    std::vector<double> f_values;
    std::vector<double> g_values;
    double p = 1.0;

    void validate(const CostMatrix& cost) const {
        if (f_values.size() != cost.n || g_values.size() != cost.m)
            throw std::invalid_argument("DualCertificate: size mismatch");
        for (std::size_t i = 0; i < cost.n; ++i)
            for (std::size_t j = 0; j < cost.m; ++j)
                if (f_values[i] > g_values[j] + std::pow(cost.at(i, j), p) + kDualFeasTol)
                    throw std::invalid_argument("DualCertificate: infeasible pair");
    }

    double objective(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const {
        double v = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) v += mu.weights[i] * f_values[i];
        for (std::size_t j = 0; j < nu.size(); ++j) v -= nu.weights[j] * g_values[j];
        return v;
    }
};

inline double transport_cost(const CouplingMatrix& plan, const CostMatrix& cost, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < plan.rows(); ++i)
        for (std::size_t j = 0; j < plan.cols(); ++j)
            s += std::pow(cost.at(i, j), p) * plan.at(i, j);
    return s;
}

namespace detail {

// Transportation simplex over supplies a (size n) and demands b (size m),
// both strictly positive and equal in total. Returns flows, duals, value.
struct SimplexOut {
    std::vector<double> flow;  // n*m row-major
    std::vector<double> u, v;  // potentials, u[0] = 0
    double value = 0.0;
};

inline SimplexOut transport_simplex(const std::vector<double>& a, const std::vector<double>& b,
                                    const std::vector<double>& c) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<double> flow(n * m, 0.0);
    std::vector<char> basic(n * m, 0);

    // Northwest-corner start; ties keep exactly n+m-1 basic cells.
    {
        std::vector<double> ar = a, br = b;
        std::size_t i = 0, j = 0;
        while (true) {
            const double x = std::min(ar[i], br[j]);
            flow[i * m + j] = x;
            basic[i * m + j] = 1;
            ar[i] -= x;
            br[j] -= x;
            if (i == n - 1 && j == m - 1) break;
            if (ar[i] <= br[j] && i < n - 1)
                ++i;
            else if (j < m - 1)
                ++j;
            else
                ++i;
        }
    }

    // Bipartite node ids: rows 0..n-1, cols n..n+m-1.
    const std::size_t nodes = n + m;
    std::vector<double> u(n, 0.0), v(m, 0.0);
    std::vector<int> parent(nodes), parent_cell(nodes);
    std::vector<std::size_t> order;
    order.reserve(nodes);

    auto rebuild_tree = [&]() {
        // BFS over basic cells from row 0; also yields potentials.
        std::fill(parent.begin(), parent.end(), -2);
        order.clear();
        parent[0] = -1;
        order.push_back(0);
        for (std::size_t head = 0; head < order.size(); ++head) {
            const std::size_t x = order[head];
            if (x < n) {
                for (std::size_t j = 0; j < m; ++j)
                    if (basic[x * m + j] && parent[n + j] == -2) {
                        parent[n + j] = static_cast<int>(x);
                        parent_cell[n + j] = static_cast<int>(x * m + j);
                        order.push_back(n + j);
                    }
            } else {
                const std::size_t j = x - n;
                for (std::size_t i = 0; i < n; ++i)
                    if (basic[i * m + j] && parent[i] == -2) {
                        parent[i] = static_cast<int>(x);
                        parent_cell[i] = static_cast<int>(i * m + j);
                        order.push_back(i);
                    }
            }
        }
        if (order.size() != nodes)
            throw std::runtime_error("transport_simplex: basis lost spanning-tree structure");
        u[0] = 0.0;
        for (std::size_t k = 1; k < order.size(); ++k) {
            const std::size_t x = order[k];
            const std::size_t cell = static_cast<std::size_t>(parent_cell[x]);
            const std::size_t ci = cell / m, cj = cell % m;
            if (x < n)
                u[x] = c[cell] - v[cj];
            else
                v[x - n] = c[cell] - u[ci];
        }
    };

    const std::size_t max_pivots = 200 * (n + m) * (n + m) + 1000;
    for (std::size_t pivot = 0;; ++pivot) {
        if (pivot > max_pivots) throw std::runtime_error("transport_simplex: pivot limit exceeded");
        rebuild_tree();

        // Bland entering rule: first cell (row-major) with negative reduced cost.
        std::size_t enter = n * m;
        for (std::size_t cell = 0; cell < n * m; ++cell) {
            if (basic[cell]) continue;
            const double rc = c[cell] - u[cell / m] - v[cell % m];
            if (rc < -kSimplexTol) {
                enter = cell;
                break;
            }
        }
        if (enter == n * m) break;  // optimal

        // Unique tree path from the entering column node back to its row node.
        const std::size_t ei = enter / m, ej = enter % m;
        std::vector<int> depth(nodes, 0);
        for (std::size_t k = 1; k < order.size(); ++k)
            depth[order[k]] = depth[static_cast<std::size_t>(parent[order[k]])] + 1;
        std::size_t x = ei, y = n + ej;
        std::vector<std::size_t> cells_x, cells_y;
        while (x != y) {
            if (depth[x] >= depth[y]) {
                cells_x.push_back(static_cast<std::size_t>(parent_cell[x]));
                x = static_cast<std::size_t>(parent[x]);
            } else {
                cells_y.push_back(static_cast<std::size_t>(parent_cell[y]));
                y = static_cast<std::size_t>(parent[y]);
            }
        }
        // Cycle cells alternate signs starting with + at the entering cell.
        std::vector<std::size_t> cycle;
        cycle.push_back(enter);
        for (std::size_t cell : cells_y) cycle.push_back(cell);
        for (auto it = cells_x.rbegin(); it != cells_x.rend(); ++it) cycle.push_back(*it);

        double theta = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < cycle.size(); k += 2)
            theta = std::min(theta, flow[cycle[k]]);
        // Lexicographically smallest minimiser leaves (deterministic ties).
        std::size_t leave = n * m;
        for (std::size_t k = 1; k < cycle.size(); k += 2)
            if (flow[cycle[k]] <= theta + 1e-15 && cycle[k] < leave) leave = cycle[k];
        if (leave == n * m) throw std::runtime_error("transport_simplex: unbounded pivot");

        for (std::size_t k = 0; k < cycle.size(); ++k) {
            if (k % 2 == 0)
                flow[cycle[k]] += theta;
            else
                flow[cycle[k]] -= theta;
        }
        flow[leave] = 0.0;
        basic[leave] = 0;
        basic[enter] = 1;
    }

    SimplexOut out;
    out.flow = std::move(flow);
    for (double& f : out.flow)
        if (f < 0.0) f = 0.0;
    out.u = std::move(u);
    out.v = std::move(v);
    out.value = 0.0;
    for (std::size_t cell = 0; cell < n * m; ++cell) out.value += c[cell] * out.flow[cell];
    return out;
}

struct ActiveProblem {
    std::vector<std::size_t> rows, cols;  // indices kept after dropping dust
    std::vector<double> a, b, c;
};

inline ActiveProblem reduce(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const CostMatrix& cost, double p) {
    ActiveProblem ap;
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu.weights[i] > kDropTol) {
            ap.rows.push_back(i);
            ap.a.push_back(mu.weights[i]);
        }
    for (std::size_t j = 0; j < nu.size(); ++j)
        if (nu.weights[j] > kDropTol) {
            ap.cols.push_back(j);
            ap.b.push_back(nu.weights[j]);
        }
    // Rebalance the dust so both sides have identical totals.
    const double sa = std::accumulate(ap.a.begin(), ap.a.end(), 0.0);
    const double sb = std::accumulate(ap.b.begin(), ap.b.end(), 0.0);
    for (double& x : ap.a) x /= sa;
    for (double& x : ap.b) x /= sb;
    ap.c.resize(ap.rows.size() * ap.cols.size());
    for (std::size_t i = 0; i < ap.rows.size(); ++i)
        for (std::size_t j = 0; j < ap.cols.size(); ++j)
            ap.c[i * ap.cols.size() + j] = std::pow(cost.at(ap.rows[i], ap.cols[j]), p);
    return ap;
}

}  // namespace detail

struct TransportResult {
    double value = 0.0;      // W_p = (min sum cost^p pi)^{1/p}
    double value_pow = 0.0;  // min sum cost^p pi
    CouplingMatrix plan;
};

// Exact L^p optimal transport. Instances above kMaxCells cells are refused:
// the point of this solver is a certified small-instance oracle.
inline TransportResult wasserstein_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                      const CostMatrix& cost, double p) {
    if (cost.n != mu.size() || cost.m != nu.size())
        throw std::invalid_argument("wasserstein_lp: cost dimensions do not match supports");
    if (!(p >= 1.0)) throw std::invalid_argument("wasserstein_lp: p must be >= 1");
    if (mu.size() * nu.size() > kMaxCells)
        throw std::invalid_argument("wasserstein_lp: instance exceeds exact-solver size cap");

    const auto ap = detail::reduce(mu, nu, cost, p);
    const auto out = detail::transport_simplex(ap.a, ap.b, ap.c);

    TransportResult res;
    res.plan.row_marginal = mu;
    res.plan.col_marginal = nu;
    res.plan.entries.assign(mu.size() * nu.size(), 0.0);
    for (std::size_t i = 0; i < ap.rows.size(); ++i)
        for (std::size_t j = 0; j < ap.cols.size(); ++j)
            res.plan.at(ap.rows[i], ap.cols[j]) = out.flow[i * ap.cols.size() + j];
    res.value_pow = out.value;
    res.value = std::pow(out.value, 1.0 / p);
    return res;
}

struct DualResult {
    double value = 0.0;  // sup mu(f) - nu(g); equals wasserstein value^p
    DualCertificate cert;
};

inline DualResult kantorovich_dual(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   const CostMatrix& cost, double p) {
    if (cost.n != mu.size() || cost.m != nu.size())
        throw std::invalid_argument("kantorovich_dual: cost dimensions do not match supports");
    if (!(p >= 1.0)) throw std::invalid_argument("kantorovich_dual: p must be >= 1");
    if (mu.size() * nu.size() > kMaxCells)
        throw std::invalid_argument("kantorovich_dual: instance exceeds exact-solver size cap");

    const auto ap = detail::reduce(mu, nu, cost, p);
    const auto out = detail::transport_simplex(ap.a, ap.b, ap.c);

    // LP duals (u, v) with u_i + v_j <= c_ij map to Kantorovich potentials
    // f = u, g = -v, so that f(x) - g(y) <= cost(x,y)^p.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> f(mu.size(), -inf), g(nu.size(), -inf);
    for (std::size_t i = 0; i < ap.rows.size(); ++i) f[ap.rows[i]] = out.u[i];
    for (std::size_t j = 0; j < ap.cols.size(); ++j) g[ap.cols[j]] = -out.v[j];
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (f[i] != -inf) continue;  // dropped row: tightest feasible value
        double best = inf;
        for (std::size_t j = 0; j < ap.cols.size(); ++j)
            best = std::min(best, g[ap.cols[j]] + std::pow(cost.at(i, ap.cols[j]), p));
        f[i] = best;
    }
    for (std::size_t j = 0; j < nu.size(); ++j) {
        if (g[j] != -inf) continue;  // dropped column
        double need = -inf;
        for (std::size_t i = 0; i < mu.size(); ++i)
            need = std::max(need, f[i] - std::pow(cost.at(i, j), p));
        g[j] = need;
    }
    const double shift = *std::min_element(g.begin(), g.end());
    for (double& x : f) x -= shift;
    for (double& x : g) x -= shift;

    DualResult res;
    res.cert.f_values = std::move(f);
    res.cert.g_values = std::move(g);
    res.cert.p = p;
    res.value = res.cert.objective(mu, nu);
    return res;
}

struct TvCouplingResult {
    double tv_half = 0.0;  // (mu - nu)^+(E) = sup_A |mu(A) - nu(A)|
    CouplingMatrix plan;
};

// Hahn-decomposition coupling: keep mu ^ nu on the diagonal and spread the
// positive part over the negative part. Optimal for the discrete cost.
inline TvCouplingResult wasserstein_coupling_tv(const DiscreteMeasure& mu,
                                                const DiscreteMeasure& nu) {
    if (!mu.same_ground_set(nu))
        throw std::invalid_argument("wasserstein_coupling_tv: measures must share a ground set");
    const std::size_t n = mu.size();
    std::vector<double> pos(n), neg(n), common(n);
    double tv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = mu.weights[i] - nu.weights[i];
        pos[i] = std::max(d, 0.0);
        neg[i] = std::max(-d, 0.0);
        common[i] = mu.weights[i] - pos[i];
        tv += pos[i];
    }

    TvCouplingResult res;
    res.tv_half = tv;
    res.plan.row_marginal = mu;
    res.plan.col_marginal = nu;
    res.plan.entries.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) res.plan.at(i, i) = common[i];
    if (tv > 0.0)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                res.plan.at(i, j) += pos[i] * neg[j] / tv;
    return res;
}

struct MonotoneMapResult {
    CouplingMatrix plan;  // comonotone (quantile) coupling
    double cost2 = 0.0;   // W_2 for cost |x-y|
};

inline MonotoneMapResult monotone_map_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    const std::size_t n = mu.size(), m = nu.size();
    auto coords = [](const DiscreteMeasure& d) {
        std::vector<double> xs(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (!d.points[i].coord)
                throw std::invalid_argument("monotone_map_1d: point without coordinate");
            xs[i] = *d.points[i].coord;
        }
        return xs;
    };
    const std::vector<double> xs = coords(mu), ys = coords(nu);

    std::vector<std::size_t> oi(n), oj(m);
    std::iota(oi.begin(), oi.end(), 0);
    std::iota(oj.begin(), oj.end(), 0);
    std::sort(oi.begin(), oi.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::sort(oj.begin(), oj.end(), [&](std::size_t a, std::size_t b) { return ys[a] < ys[b]; });

    MonotoneMapResult res;
    res.plan.row_marginal = mu;
    res.plan.col_marginal = nu;
    res.plan.entries.assign(n * m, 0.0);

    for (std::size_t k = 1; k < n; ++k)
        if (xs[oi[k]] <= xs[oi[k - 1]])
            throw std::invalid_argument("monotone_map_1d: coordinates must be distinct");
    for (std::size_t k = 1; k < m; ++k)
        if (ys[oj[k]] <= ys[oj[k - 1]])
            throw std::invalid_argument("monotone_map_1d: coordinates must be distinct");

    // Two-pointer mass matching along the sorted supports.
    std::size_t i = 0, j = 0;
    double ra = mu.weights[oi[0]], rb = nu.weights[oj[0]];
    double cost_sq = 0.0;
    while (i < n && j < m) {
        const double x = std::min(ra, rb);
        res.plan.at(oi[i], oj[j]) += x;
        const double d = xs[oi[i]] - ys[oj[j]];
        cost_sq += x * d * d;
        ra -= x;
        rb -= x;
        if (ra <= kDropTol) {
            ++i;
            if (i < n) ra = mu.weights[oi[i]];
        }
        if (rb <= kDropTol) {
            ++j;
            if (j < m) rb = nu.weights[oj[j]];
        }
    }
    res.cost2 = std::sqrt(cost_sq);
    return res;
}

struct FkgResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// mu(fg) + nu(fg) >= mu(f)nu(g) + nu(f)mu(g) for increasing f, g on an
// ordered real ground set. f and g are given as value vectors per point.
inline FkgResult fkg_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const std::vector<double>& f, const std::vector<double>& g) {
    if (!mu.same_ground_set(nu))
        throw std::invalid_argument("fkg_check: measures must share a ground set");
    const std::size_t n = mu.size();
    if (f.size() != n || g.size() != n)
        throw std::invalid_argument("fkg_check: function vector length mismatch");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
        if (!mu.points[i].coord) throw std::invalid_argument("fkg_check: point without coordinate");
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *mu.points[a].coord < *mu.points[b].coord;
    });
    for (std::size_t k = 1; k < n; ++k) {
        if (f[order[k]] < f[order[k - 1]] - 1e-15)
            throw std::invalid_argument("fkg_check: f is not non-decreasing");
        if (g[order[k]] < g[order[k - 1]] - 1e-15)
            throw std::invalid_argument("fkg_check: g is not non-decreasing");
    }

    auto integrate = [&](const DiscreteMeasure& d, auto&& fn) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += d.weights[i] * fn(i);
        return s;
    };
    FkgResult res;
    res.lhs = integrate(mu, [&](std::size_t i) { return f[i] * g[i]; }) +
              integrate(nu, [&](std::size_t i) { return f[i] * g[i]; });
    res.rhs = integrate(mu, [&](std::size_t i) { return f[i]; }) *
                  integrate(nu, [&](std::size_t i) { return g[i]; }) +
              integrate(nu, [&](std::size_t i) { return f[i]; }) *
                  integrate(mu, [&](std::size_t i) { return g[i]; });
    res.holds = res.lhs >= res.rhs - 1e-12;
    return res;
}

}  // namespace couplab::measures
