#pragma once

// Test-side oracles, kept independent of the library's solver paths.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracles {

// Exact minimum transport cost by exhaustive enumeration of basic solutions
// (all spanning-tree supports of the bipartite flow problem). Exponential;
// intended for n, m <= 4.
inline double transport_min_cost(const std::vector<double>& a, const std::vector<double>& b,
                                 const std::vector<double>& c) {
    const std::size_t n = a.size(), m = b.size();
    const std::size_t cells = n * m;
    const std::size_t k = n + m - 1;
    if (cells > 20) throw std::invalid_argument("oracle: instance too large");

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> comb(k);
    for (std::size_t i = 0; i < k; ++i) comb[i] = i;

    auto try_basis = [&](const std::vector<std::size_t>& basis) {
        // Peel leaves of the bipartite support; flows are forced on a tree.
        std::vector<double> ar = a, br = b;
        std::vector<char> used(basis.size(), 0);
        std::vector<int> row_deg(n, 0), col_deg(m, 0);
        for (std::size_t cell : basis) {
            ++row_deg[cell / m];
            ++col_deg[cell % m];
        }
        double cost = 0.0;
        std::size_t remaining = basis.size();
        while (remaining > 0) {
            bool progressed = false;
            for (std::size_t e = 0; e < basis.size(); ++e) {
                if (used[e]) continue;
                const std::size_t i = basis[e] / m, j = basis[e] % m;
                double flow;
                if (row_deg[i] == 1)
                    flow = ar[i];
                else if (col_deg[j] == 1)
                    flow = br[j];
                else
                    continue;
                if (flow < -1e-12) return;  // infeasible support
                used[e] = 1;
                --remaining;
                ar[i] -= flow;
                br[j] -= flow;
                --row_deg[i];
                --col_deg[j];
                cost += c[basis[e]] * flow;
                progressed = true;
            }
            if (!progressed) return;  // support has a cycle: not a basis
        }
        for (double r : ar)
            if (std::abs(r) > 1e-9) return;
        for (double r : br)
            if (std::abs(r) > 1e-9) return;
        if (cost < best) best = cost;
    };

    while (true) {
        try_basis(comb);
        // next combination
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (comb[i] != i + cells - k) break;
        }
        if (comb[i] == i + cells - k) break;
        ++comb[i];
        for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
    if (!std::isfinite(best)) throw std::runtime_error("oracle: no feasible basis found");
    return best;
}

}  // namespace oracles
