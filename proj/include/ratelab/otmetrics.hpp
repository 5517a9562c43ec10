#ifndef RATELAB_OTMETRICS_HPP
#define RATELAB_OTMETRICS_HPP

#include <optional>
#include <vector>

#include "ratelab/pathspace.hpp"

namespace ratelab {

// Dense sup-distance cost matrix between the atoms of two equal-size
// empirical path measures: entry (i,j) = sup_distance(mu_i, nu_j).
class CostMatrix {
public:
    static CostMatrix between(const EmpiricalPathMeasure& mu,
                              const EmpiricalPathMeasure& nu);
    static CostMatrix from_rows(int m, std::vector<double> entries);

    int size() const { return m_; }
    double operator()(int i, int j) const { return c_[static_cast<std::size_t>(i) * m_ + j]; }
    const std::vector<double>& entries() const { return c_; }

private:
    CostMatrix(int m, std::vector<double> c) : m_(m), c_(std::move(c)) {}
    int m_;
    std::vector<double> c_;
};

// Minimum-cost perfect assignment (shortest augmenting paths with
// potentials, O(M^3)). Returns the column assigned to each row.
std::vector<int> min_cost_assignment(const CostMatrix& cost, double* total = nullptr);

// Maximum matching (Hopcroft-Karp) in the bipartite graph with edges
// {(i,j): cost(i,j) <= threshold}.
int max_matching_at(const CostMatrix& cost, double threshold);

// 1-Wasserstein distance between equal-size uniform empirical measures with
// sup-norm cost: (1/M) min over permutations of sum_i cost(i, pi(i)).
double wasserstein1(const EmpiricalPathMeasure& mu, const EmpiricalPathMeasure& nu);
double wasserstein1(const CostMatrix& cost);

// Prokhorov distance via the coupling characterisation: the smallest
// candidate eps (a cost entry or k/M) whose threshold graph has matching
// deficiency at most eps*M. Feasibility is monotone in eps, so the scan over
// sorted candidates is a binary search on the index.
double prokhorov(const EmpiricalPathMeasure& mu, const EmpiricalPathMeasure& nu);
double prokhorov(const CostMatrix& cost);

// Shared feasibility primitive: a transport within eps exists iff the
// matching deficiency M - |matching| is at most eps*M.
bool prokhorov_feasible(int deficiency, int m, double eps);

struct InequalityReport {
    double w1 = 0.0;
    double pi = 0.0;
    double sqrt_w1 = 0.0;
    std::optional<double> coupled_sup;
};

// Verifies Pi <= sqrt(W1), and Pi <= coupled sup-distance when a coupling
// bound is supplied. Throws InequalityViolation on failure (these hold for
// exact solvers and signal a bug).
InequalityReport check_inequalities(const EmpiricalPathMeasure& mu,
                                    const EmpiricalPathMeasure& nu,
                                    std::optional<double> coupled_sup = std::nullopt);

}  // namespace ratelab

#endif
