#ifndef RATELAB_ORACLES_HPP
#define RATELAB_ORACLES_HPP

#include "ratelab/otmetrics.hpp"
#include "ratelab/suspension.hpp"

namespace ratelab {

// Independent brute-force references for the exact solvers. These live on
// the slow side on purpose: factorial and exponential enumerations that the
// production algorithms must reproduce exactly.

// Minimum over all M! permutations (M <= 8).
double w1_bruteforce(const CostMatrix& cost);

// Smallest candidate eps such that every subset B of the first measure's
// atoms satisfies |B| <= |B^eps| + eps*M, checked over all 2^M subsets
// (M <= 16). Shares the candidate set and the feasibility comparison with
// the production solver.
double prokhorov_bruteforce(const CostMatrix& cost);

// Lap count by naive repeated subtraction of roof values.
long lap_number_bruteforce(const SuspensionFlow& flow, double x, double u, double t);

}  // namespace ratelab

#endif
