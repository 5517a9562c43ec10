#include "ratelab/otmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>

#include "ratelab/errors.hpp"

namespace ratelab {

CostMatrix CostMatrix::between(const EmpiricalPathMeasure& mu,
                               const EmpiricalPathMeasure& nu) {
    if (mu.size() != nu.size())
        throw SizeMismatch("empirical measures have different atom counts");
    if (mu.dim() != nu.dim())
        throw std::invalid_argument("empirical measures have different dimensions");
    const int m = static_cast<int>(mu.size());
    std::vector<double> c(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            c[static_cast<std::size_t>(i) * m + j] = sup_distance(mu.paths[i], nu.paths[j]);
    return CostMatrix(m, std::move(c));
}

CostMatrix CostMatrix::from_rows(int m, std::vector<double> entries) {
    if (entries.size() != static_cast<std::size_t>(m) * m)
        throw std::invalid_argument("cost matrix entry count mismatch");
    for (double e : entries)
        if (!(e >= 0.0)) throw std::invalid_argument("cost entries must be >= 0");
    return CostMatrix(m, std::move(entries));
}

// Shortest augmenting paths with dual potentials; ties resolved toward the
// lowest column index by the strict comparisons.
std::vector<int> min_cost_assignment(const CostMatrix& cost, double* total) {
    const int n = cost.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);    // row matched to column j
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    double sum = 0.0;
    for (int j = 1; j <= n; ++j) {
        row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
        sum += cost(p[static_cast<std::size_t>(j)] - 1, j - 1);
    }
    if (total) *total = sum;
    return row_to_col;
}

int max_matching_at(const CostMatrix& cost, double threshold) {
    const int n = cost.size();
    // adjacency of the thresholded graph
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (cost(i, j) <= threshold) adj[static_cast<std::size_t>(i)].push_back(j);

    constexpr int kInf = std::numeric_limits<int>::max();
    std::vector<int> match_left(static_cast<std::size_t>(n), -1);
    std::vector<int> match_right(static_cast<std::size_t>(n), -1);
    std::vector<int> dist(static_cast<std::size_t>(n));

    auto bfs = [&]() {
        std::queue<int> q;
        bool found = false;
        for (int i = 0; i < n; ++i) {
            if (match_left[static_cast<std::size_t>(i)] < 0) {
                dist[static_cast<std::size_t>(i)] = 0;
                q.push(i);
            } else {
                dist[static_cast<std::size_t>(i)] = kInf;
            }
        }
        while (!q.empty()) {
            const int i = q.front();
            q.pop();
            for (int j : adj[static_cast<std::size_t>(i)]) {
                const int i2 = match_right[static_cast<std::size_t>(j)];
                if (i2 < 0) {
                    found = true;
                } else if (dist[static_cast<std::size_t>(i2)] == kInf) {
                    dist[static_cast<std::size_t>(i2)] = dist[static_cast<std::size_t>(i)] + 1;
                    q.push(i2);
                }
            }
        }
        return found;
    };

    std::function<bool(int)> dfs = [&](int i) {
        for (int j : adj[static_cast<std::size_t>(i)]) {
            const int i2 = match_right[static_cast<std::size_t>(j)];
            if (i2 < 0 || (dist[static_cast<std::size_t>(i2)] ==
                               dist[static_cast<std::size_t>(i)] + 1 &&
                           dfs(i2))) {
                match_left[static_cast<std::size_t>(i)] = j;
                match_right[static_cast<std::size_t>(j)] = i;
                return true;
            }
        }
        dist[static_cast<std::size_t>(i)] = kInf;
        return false;
    };

    int matching = 0;
    while (bfs()) {
        for (int i = 0; i < n; ++i)
            if (match_left[static_cast<std::size_t>(i)] < 0 && dfs(i)) ++matching;
    }
    return matching;
}

double wasserstein1(const CostMatrix& cost) {
    double total = 0.0;
    min_cost_assignment(cost, &total);
    return total / cost.size();
}

double wasserstein1(const EmpiricalPathMeasure& mu, const EmpiricalPathMeasure& nu) {
    return wasserstein1(CostMatrix::between(mu, nu));
}

bool prokhorov_feasible(int deficiency, int m, double eps) {
    return static_cast<double>(deficiency) <= eps * static_cast<double>(m);
}

double prokhorov(const CostMatrix& cost) {
    const int m = cost.size();
    std::vector<double> candidates(cost.entries());
    candidates.reserve(candidates.size() + static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k)
        candidates.push_back(static_cast<double>(k) / static_cast<double>(m));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    auto feasible = [&](double eps) {
        const int deficiency = m - max_matching_at(cost, eps);
        return prokhorov_feasible(deficiency, m, eps);
    };
    // feasibility is monotone in eps; the largest candidate (>= 1) is feasible
    std::size_t lo = 0, hi = candidates.size() - 1;
    if (feasible(candidates[0])) return candidates[0];
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (feasible(candidates[mid]))
            hi = mid;
        else
            lo = mid;
    }
    return candidates[hi];
}

double prokhorov(const EmpiricalPathMeasure& mu, const EmpiricalPathMeasure& nu) {
    return prokhorov(CostMatrix::between(mu, nu));
}

InequalityReport check_inequalities(const EmpiricalPathMeasure& mu,
                                    const EmpiricalPathMeasure& nu,
                                    std::optional<double> coupled_sup) {
    const CostMatrix cost = CostMatrix::between(mu, nu);
    InequalityReport rep;
    rep.w1 = wasserstein1(cost);
    rep.pi = prokhorov(cost);
    rep.sqrt_w1 = std::sqrt(rep.w1);
    rep.coupled_sup = coupled_sup;
    constexpr double kSlack = 1e-12;
    if (rep.pi > rep.sqrt_w1 + kSlack)
        throw InequalityViolation("Prokhorov exceeds sqrt(W1): " + std::to_string(rep.pi) +
                                  " > sqrt(" + std::to_string(rep.w1) + ")");
    if (coupled_sup && rep.pi > *coupled_sup + kSlack)
        throw InequalityViolation("Prokhorov exceeds the coupling sup-distance bound");
    return rep;
}

}  // namespace ratelab
