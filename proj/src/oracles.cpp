#include "ratelab/oracles.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ratelab {

double w1_bruteforce(const CostMatrix& cost) {
    const int m = cost.size();
    if (m > 8) throw std::invalid_argument("brute-force W1 limited to M <= 8");
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += cost(i, perm[static_cast<std::size_t>(i)]);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / m;
}

double prokhorov_bruteforce(const CostMatrix& cost) {
    const int m = cost.size();
    if (m > 16) throw std::invalid_argument("brute-force Prokhorov limited to M <= 16");
    std::vector<double> candidates(cost.entries());
    for (int k = 0; k <= m; ++k)
        candidates.push_back(static_cast<double>(k) / static_cast<double>(m));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const std::size_t subsets = std::size_t{1} << m;
    std::vector<int> union_count(subsets);
    std::vector<unsigned> neighbor(static_cast<std::size_t>(m));
    std::vector<unsigned> union_mask(subsets);

    for (double eps : candidates) {
        for (int i = 0; i < m; ++i) {
            unsigned mask = 0;
            for (int j = 0; j < m; ++j)
                if (cost(i, j) <= eps) mask |= 1u << j;
            neighbor[static_cast<std::size_t>(i)] = mask;
        }
        union_mask[0] = 0;
        int worst = 0;  // max over B of |B| - |B^eps|
        for (std::size_t s = 1; s < subsets; ++s) {
            const std::size_t low = s & (s - 1);
            const int bit = __builtin_ctzll(s);
            union_mask[s] = union_mask[low] | neighbor[static_cast<std::size_t>(bit)];
            const int deficiency =
                __builtin_popcountll(s) - __builtin_popcount(union_mask[s]);
            worst = std::max(worst, deficiency);
        }
        if (prokhorov_feasible(worst, m, eps)) return eps;
    }
    return candidates.back();
}

long lap_number_bruteforce(const SuspensionFlow& flow, double x, double u, double t) {
    double s = t + u;
    double xc = x;
    long n = 0;
    while (s >= flow.roof()(xc)) {
        s -= flow.roof()(xc);
        xc = flow.base().step(xc);
        ++n;
    }
    return n;
}

}  // namespace ratelab
