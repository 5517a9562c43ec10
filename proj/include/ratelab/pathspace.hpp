#ifndef RATELAB_PATHSPACE_HPP
#define RATELAB_PATHSPACE_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ratelab/funcrep.hpp"
#include "ratelab/linalg.hpp"
#include "ratelab/rng.hpp"
#include "ratelab/suspension.hpp"

namespace ratelab {

// Continuous piecewise-linear path [0,1] -> R^N with explicit nodes at 0 and
// 1. Paths store both node values and segment increments: built
// from_increments, the values are the prefix sums (so segment-permuting
// operations like the time reversal h round-trip exactly); built
// from_values, the given values are kept verbatim (so serialisation
// round-trips bitwise).
class PiecewisePath {
public:
    static PiecewisePath from_increments(std::vector<double> times,
                                         std::vector<double> start_value,
                                         std::vector<double> increments, int dim);
    static PiecewisePath from_values(std::vector<double> times,
                                     std::vector<double> values, int dim);
    static PiecewisePath zero(int dim);

    int dim() const { return dim_; }
    std::size_t nodes() const { return times_.size(); }
    double time(std::size_t i) const { return times_[i]; }
    const std::vector<double>& times() const { return times_; }
    const double* value(std::size_t i) const { return values_.data() + i * dim_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& increments() const { return increments_; }
    const std::vector<double>& start_value() const { return start_; }

    void eval(double t, double* out) const;
    double eval1(double t) const;  // convenience for dim 1

    // Path with nodes at new_times and this path's values there.
    PiecewisePath restricted(const std::vector<double>& new_times) const;

    bool identical(const PiecewisePath& other) const;  // bitwise

private:
    PiecewisePath() = default;
    int dim_ = 1;
    std::vector<double> times_;
    std::vector<double> start_;
    std::vector<double> increments_;  // (nodes-1) x dim
    std::vector<double> values_;      // nodes x dim, prefix sums
};

// Uniform empirical measure on path space: M paths, weights 1/M.
struct EmpiricalPathMeasure {
    std::vector<PiecewisePath> paths;

    explicit EmpiricalPathMeasure(std::vector<PiecewisePath> p);
    std::size_t size() const { return paths.size(); }
    int dim() const { return paths.front().dim(); }
};

// B_n: nodes k/n, value n^{-1/2} sum_{j<k} v(x_j); starts at 0.
PiecewisePath build_Bn(const std::vector<double>& orbit, const MapObservable& v,
                       std::size_t n);

// W_n on d+1 output nodes i/d: value n^{-1/2} * integral of v over
// [0, n i/d] along the flow from (base_orbit[0], u0). The base orbit must
// cover the needed laps (see SuspensionFlow::orbit_length_for).
PiecewisePath build_Wn(const SuspensionFlow& flow, const FlowObservable& v,
                       const std::vector<double>& base_orbit, double u0,
                       double n, int d,
                       double dt = SuspensionFlow::kDefaultQuadratureStep);

// Brownian path with covariance sigma on nodes i/d: cumulative sums of
// i.i.d. Gaussian increments with covariance sigma/d. Throws NotPSD if
// sigma requires repair beyond 1e-6.
PiecewisePath sample_brownian(const Matrix& sigma, int d, SplitMix64& rng);
PiecewisePath sample_brownian(const Matrix& sigma, int d, std::uint64_t seed);

// (h f)(t) = f(1) - f(1-t). Exact involution on paths pinned at f(0)=0 when
// node times have exact complements (dyadic nodes do).
PiecewisePath h_reversal(const PiecewisePath& path);

// Exact sup-norm distance: the difference is piecewise linear on the union
// of node sets and |.| is convex on each segment, so the sup is attained at
// a union node.
double sup_distance(const PiecewisePath& a, const PiecewisePath& b);

// CSV with one row per node: path,t,v1..vN. Paths must share a dimension.
void write_paths_csv(std::ostream& os, const std::vector<PiecewisePath>& paths);
std::vector<PiecewisePath> read_paths_csv(std::istream& is);

}  // namespace ratelab

#endif
