#ifndef RATELAB_DECOMP_HPP
#define RATELAB_DECOMP_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ratelab/dynsys.hpp"
#include "ratelab/funcrep.hpp"
#include "ratelab/linalg.hpp"
#include "ratelab/suspension.hpp"

namespace ratelab {

// Transfer operator P of an interval map, characterised by
// int (Pv) w dmu = int v (w o T) dmu. Two modes:
//  - ExactDoubling: the doubling map with invariant measure Lebesgue;
//    (Pv)(x) = (v(x/2) + v((x+1)/2)) / 2. Exact on trig polynomials,
//    interpolation-exact on grid tables.
//  - GridGibbsMarkov: the first-return map of LSV on Y = (1/2,1], with the
//    branch sum (Pv)(y) = sum_j g(y_j) v(y_j) truncated once the Gibbs
//    weights fall below a cutoff; the invariant density is computed by
//    power iteration on the grid.
class TransferOperator {
public:
    static TransferOperator exact_doubling();
    static TransferOperator grid_gibbs_markov(const InducedMap& induced,
                                              int grid_size = 4096,
                                              double weight_cutoff = 1e-10);

    Func apply(const Func& v) const;        // P v
    Func compose_map(const Func& v) const;  // v o T
    double integrate(const Func& v) const;  // against the invariant measure
    double integrate_product(const Func& f, const Func& g) const;
    double sup_norm(const Func& v) const;

    // Mean-zero copy: v - int v dmu.
    Func centered(const Func& v) const;

    bool is_exact_doubling() const;
    // Branch count J actually used (GridGibbsMarkov; 2 for doubling).
    int branch_count() const;
    int grid_size() const;
    std::string describe() const;

    struct Impl;

private:
    explicit TransferOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

// Martingale-coboundary data for a mean-zero observable v = m + chi o T - chi
// with P m = 0: per-component m and chi, the limiting covariance
// Sigma = int m m^T dmu, the achieved residual sup|P m|, and the series
// truncation depth.
struct Decomposition {
    std::vector<Func> m;
    std::vector<Func> chi;
    Matrix sigma;
    double residual = 0.0;
    int truncation_K = 0;

    int dim() const { return static_cast<int>(m.size()); }
    nlohmann::json to_json() const;
};

// chi = sum_{k=1..K} P^k v truncated when sup|P^k v| < tol (hard cap K=200);
// m = v - chi o T + chi. Components are decomposed jointly so Sigma is the
// full covariance matrix. Preconditions: each component mean-zero to 1e-8.
// Throws NoDecay if sup|P^k v| stops decreasing for 50 consecutive k before
// reaching tol.
Decomposition primary_decomposition(const TransferOperator& op,
                                    const std::vector<Func>& v, double tol = 1e-10);

// Secondary observable Phi = (P(m m^T)) o T - Sigma, returned row-major as
// N*N functions; N=1 reduces to (P(m^2)) o T - sigma^2. Mean zero by
// construction.
std::vector<Func> secondary_decomposition(const TransferOperator& op,
                                          const Decomposition& d);

// Green-Kubo estimate from one long orbit:
//   Sigma = C_0 + sum_{k=1..max_lag} (C_k + C_k^T)
// with empirically centered lag-k autocovariances C_k. The result is
// symmetrized and negative eigenvalues are clamped at zero; *clamped reports
// whether clamping changed anything.
Matrix green_kubo_sigma(const OrbitSampler& sampler, const MapObservable& v,
                        int max_lag, std::size_t orbit_len, bool* clamped = nullptr);

// Decomposition lifted to a suspension flow over a uniformly expanding base
// (the base map is its own induced map, so the roof is the lap length):
//   v'(y)   = integral of v(y, .) over one lap (the induced observable),
//   chi(y,u) = chi'(y) + integral of v(y, .) over [0, u],
//   m(y,u)  = m'(y) on u in [r(y)-1, r(y)), else 0,
// where (m', chi') is the discrete decomposition of v'. The flow covariance
// is Sigma' / mean(r).
class FlowDecomposition {
public:
    FlowDecomposition(const SuspensionFlow& flow, const FlowObservable& v,
                      int grid_size = 4096, double tol = 1e-10);

    const Decomposition& induced() const { return induced_; }
    const Matrix& sigma() const { return sigma_; }
    double roof_mean() const { return roof_mean_; }

    void eval_m(double y, double u, double* out) const;
    void eval_chi(double y, double u, double* out) const;
    // psi(y,u) = integral of v along the flow over [0,1] from (y,u).
    void eval_psi(double y, double u, double* out) const;
    // Pointwise transfer-operator image (L_1 applied to m), for kernel checks:
    // v(y,u-1) above height 1, the weighted branch sum below.
    void eval_transfer_m(double y, double u, double* out) const;

    int dim() const { return induced_.dim(); }

private:
    SuspensionFlow flow_;
    FlowObservable v_;
    Decomposition induced_;
    Matrix sigma_;
    double roof_mean_ = 0.0;
    double quad_step_;
};

}  // namespace ratelab

#endif
