#include "ratelab/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ratelab/errors.hpp"

namespace ratelab {

namespace {

// 2-point Gauss-Legendre on each grid cell: exact for cubic integrands, in
// particular for products of up to three linear interpolants.
constexpr double kGaussOffset = 0.28867513459481288225457439025098;  // 1/(2 sqrt(3))

template <class F>
double integrate_cells(double lo, double hi, int cells, F&& integrand) {
    const double h = (hi - lo) / cells;
    double s = 0.0;
    for (int i = 0; i < cells; ++i) {
        const double mid = lo + h * (i + 0.5);
        s += integrand(mid - h * kGaussOffset) + integrand(mid + h * kGaussOffset);
    }
    return s * h * 0.5;
}

GridTable to_grid(const Func& v, double lo, double hi, int grid_size) {
    if (!v.is_trig()) return v.grid();
    const TrigPoly& p = v.trig();
    return GridTable::sampled(lo, hi, grid_size, [&](double x) { return p(x); });
}

}  // namespace

struct TransferOperator::Impl {
    virtual ~Impl() = default;
    virtual Func apply(const Func&) const = 0;
    virtual Func compose(const Func&) const = 0;
    virtual double integrate(const Func&) const = 0;
    virtual double integrate_product(const Func&, const Func&) const = 0;
    virtual double sup_norm(const Func&) const = 0;
    virtual bool exact_doubling() const = 0;
    virtual int branches() const = 0;
    virtual int grid() const = 0;
    virtual std::string describe() const = 0;
};

namespace {

class DoublingImpl final : public TransferOperator::Impl {
public:
    Func apply(const Func& v) const override {
        if (v.is_trig()) return Func(v.trig().transfer_doubling());
        const GridTable& g = v.grid();
        require_unit(g);
        std::vector<double> out(g.values().size());
        const int n = g.cells();
        for (int i = 0; i <= n; ++i) {
            const double x = g.node(i);
            out[i] = 0.5 * (g(0.5 * x) + g(0.5 * (x + 1.0)));
        }
        return Func(GridTable(0.0, 1.0, std::move(out)));
    }

    Func compose(const Func& v) const override {
        if (v.is_trig()) return Func(v.trig().compose_doubling());
        const GridTable& g = v.grid();
        require_unit(g);
        std::vector<double> out(g.values().size());
        const int n = g.cells();
        for (int i = 0; i <= n; ++i) {
            const double x = g.node(i);
            out[i] = g(x < 0.5 ? 2.0 * x : 2.0 * x - 1.0);
        }
        return Func(GridTable(0.0, 1.0, std::move(out)));
    }

    double integrate(const Func& v) const override {
        if (v.is_trig()) return v.trig().mean_lebesgue();
        const GridTable& g = v.grid();
        require_unit(g);
        // trapezoid = exact integral of the interpolant
        double s = 0.0;
        for (int i = 0; i < g.cells(); ++i)
            s += 0.5 * (g.values()[i] + g.values()[i + 1]);
        return s / g.cells();
    }

    double integrate_product(const Func& f, const Func& g) const override {
        if (f.is_trig() && g.is_trig()) return f.trig().product(g.trig()).mean_lebesgue();
        const GridTable& a = f.is_trig() ? to_grid(f, 0.0, 1.0, default_grid_) : f.grid();
        const GridTable& b = g.is_trig() ? to_grid(g, 0.0, 1.0, default_grid_) : g.grid();
        const int cells = std::max(a.cells(), b.cells());
        return integrate_cells(0.0, 1.0, cells,
                               [&](double x) { return a(x) * b(x); });
    }

    double sup_norm(const Func& v) const override {
        if (!v.is_trig()) return v.grid().max_abs();
        const TrigPoly& p = v.trig();
        if (p.is_zero()) return 0.0;
        double m = 0.0;
        for (int i = 0; i < 8192; ++i)
            m = std::max(m, std::fabs(p(static_cast<double>(i) / 8192.0)));
        return m;
    }

    bool exact_doubling() const override { return true; }
    int branches() const override { return 2; }
    int grid() const override { return default_grid_; }
    std::string describe() const override { return "exact-doubling"; }

private:
    static void require_unit(const GridTable& g) {
        if (g.lo() != 0.0 || g.hi() != 1.0)
            throw std::invalid_argument("doubling operator expects tables on [0,1]");
    }
    static constexpr int default_grid_ = 4096;
};

// First-return LSV map on Y = (1/2,1]. Branch j consists of points whose
// return time is j; its inverse is one right-branch inverse followed by j-1
// left-branch inverses. The invariant density on the grid comes from power
// iteration of the Lebesgue transfer operator.
class GibbsMarkovImpl final : public TransferOperator::Impl {
public:
    GibbsMarkovImpl(const InducedMap& induced, int grid_size, double weight_cutoff)
        : induced_(induced), gamma_(induced.base().gamma()), G_(grid_size) {
        if (grid_size < 8) throw std::invalid_argument("grid size too small");
        build_branches(weight_cutoff);
        build_density();
        build_mu_weights();
        build_compose_targets();
    }

    Func apply(const Func& v) const override {
        const GridTable g = as_table(v);
        std::vector<double> out(static_cast<std::size_t>(G_) + 1, 0.0);
        for (int i = 0; i <= G_; ++i) {
            double s = 0.0;
            for (int j = 0; j < J_; ++j)
                s += mu_weight_[j][i] * g(preimage_[j][i]);
            out[i] = s;
        }
        return Func(GridTable(kLo, kHi, std::move(out)));
    }

    Func compose(const Func& v) const override {
        const GridTable g = as_table(v);
        std::vector<double> out(static_cast<std::size_t>(G_) + 1);
        for (int i = 0; i <= G_; ++i) out[i] = g(compose_target_[i]);
        return Func(GridTable(kLo, kHi, std::move(out)));
    }

    double integrate(const Func& v) const override {
        const GridTable g = as_table(v);
        return integrate_cells(kLo, kHi, G_,
                               [&](double x) { return g(x) * density_interp(x); });
    }

    double integrate_product(const Func& f, const Func& g) const override {
        const GridTable a = as_table(f);
        const GridTable b = as_table(g);
        return integrate_cells(kLo, kHi, G_, [&](double x) {
            return a(x) * b(x) * density_interp(x);
        });
    }

    double sup_norm(const Func& v) const override { return as_table(v).max_abs(); }

    bool exact_doubling() const override { return false; }
    int branches() const override { return J_; }
    int grid() const override { return G_; }
    std::string describe() const override {
        return "grid-gibbs-markov(gamma=" + std::to_string(gamma_) +
               ", G=" + std::to_string(G_) + ", J=" + std::to_string(J_) + ")";
    }

private:
    static constexpr double kLo = 0.5;
    static constexpr double kHi = 1.0;

    double node(int i) const { return kLo + 0.5 * static_cast<double>(i) / G_; }

    GridTable as_table(const Func& v) const {
        if (v.is_trig()) return to_grid(v, kLo, kHi, G_);
        const GridTable& g = v.grid();
        if (g.lo() != kLo || g.hi() != kHi)
            throw std::invalid_argument("induced-map operator expects tables on (1/2,1]");
        return g;
    }

    // left branch l(x) = x (1 + (2x)^gamma) on [0, 1/2)
    double left(double x) const { return x * (1.0 + std::pow(2.0 * x, gamma_)); }
    double left_deriv(double x) const {
        return 1.0 + (1.0 + gamma_) * std::pow(2.0 * x, gamma_);
    }
    double left_inverse(double w) const {
        // monotone on [0, 1/2]; Newton with bisection bracket
        double lo = 0.0, hi = std::min(w, 0.5);
        double x = 0.5 * w;
        for (int it = 0; it < 200; ++it) {
            const double fx = left(x) - w;
            if (fx > 0.0) hi = x; else lo = x;
            const double nx = x - fx / left_deriv(x);
            x = (nx > lo && nx < hi) ? nx : 0.5 * (lo + hi);
            if (hi - lo < 1e-17 * (1.0 + hi)) break;
        }
        return x;
    }

    void build_branches(double cutoff) {
        const std::size_t nodes = static_cast<std::size_t>(G_) + 1;
        std::vector<double> w(nodes), dw(nodes, 1.0);
        for (std::size_t i = 0; i < nodes; ++i) w[i] = node(static_cast<int>(i));
        const int hard_cap = 100000;
        for (int j = 1; j <= hard_cap; ++j) {
            // branch j: preimage (w + 1)/2 with |h_j'| = dw / 2
            std::vector<double> pre(nodes), wt(nodes);
            double sup = 0.0;
            for (std::size_t i = 0; i < nodes; ++i) {
                pre[i] = 0.5 * (w[i] + 1.0);
                wt[i] = 0.5 * dw[i];
                sup = std::max(sup, wt[i]);
            }
            if (j > 5 && sup < cutoff) break;
            preimage_.push_back(std::move(pre));
            leb_weight_.push_back(std::move(wt));
            // extend the inverse chain: w <- l^{-1}(w)
            for (std::size_t i = 0; i < nodes; ++i) {
                const double next = left_inverse(w[i]);
                dw[i] /= left_deriv(next);
                w[i] = next;
            }
        }
        J_ = static_cast<int>(preimage_.size());
    }

    double density_interp(double x) const {
        const double pos = (x - kLo) / (kHi - kLo) * G_;
        int i = static_cast<int>(pos);
        if (i < 0) i = 0;
        if (i >= G_) i = G_ - 1;
        const double frac = pos - i;
        return density_[i] + frac * (density_[i + 1] - density_[i]);
    }

    void build_density() {
        const std::size_t nodes = static_cast<std::size_t>(G_) + 1;
        density_.assign(nodes, 2.0);  // probability density on an interval of length 1/2
        std::vector<double> next(nodes);
        for (int iter = 0; iter < 5000; ++iter) {
            for (std::size_t i = 0; i < nodes; ++i) {
                double s = 0.0;
                for (int j = 0; j < J_; ++j)
                    s += leb_weight_[j][i] * density_interp(preimage_[j][i]);
                next[i] = s;
            }
            // renormalize to a probability density on Y
            double mass = 0.0;
            for (int i = 0; i < G_; ++i) mass += 0.5 * (next[i] + next[i + 1]);
            mass *= 0.5 / G_;
            double diff = 0.0;
            for (std::size_t i = 0; i < nodes; ++i) {
                next[i] /= mass;
                diff = std::max(diff, std::fabs(next[i] - density_[i]));
            }
            density_.swap(next);
            if (diff < 1e-13) break;
        }
    }

    void build_mu_weights() {
        const std::size_t nodes = static_cast<std::size_t>(G_) + 1;
        mu_weight_.assign(J_, std::vector<double>(nodes));
        for (int j = 0; j < J_; ++j)
            for (std::size_t i = 0; i < nodes; ++i)
                mu_weight_[j][i] = leb_weight_[j][i] * density_interp(preimage_[j][i]) /
                                   density_[i];
    }

    void build_compose_targets() {
        const std::size_t nodes = static_cast<std::size_t>(G_) + 1;
        compose_target_.resize(nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            // Dyadic nodes can be pathological: 0.5 is outside the domain and
            // a node like 0.75 maps exactly onto the neutral fixed point and
            // never returns. Nudge such nodes into their cell.
            double y = (i == 0) ? node(0) + 1e-4 * (0.5 / G_) : node(static_cast<int>(i));
            for (int attempt = 0;; ++attempt) {
                try {
                    compose_target_[i] = induced_.apply(y).image;
                    break;
                } catch (const ReturnOverflow&) {
                    if (attempt >= 4) throw;
                    y += 1e-4 * (0.5 / G_);
                    if (y > 1.0) y = 1.0 - 1e-4 * (0.5 / G_);
                }
            }
        }
    }

    InducedMap induced_;
    double gamma_;
    int G_;
    int J_ = 0;
    std::vector<std::vector<double>> preimage_;    // [branch][node]
    std::vector<std::vector<double>> leb_weight_;  // 1/|F'| at the preimage
    std::vector<std::vector<double>> mu_weight_;   // Gibbs weights g
    std::vector<double> density_;                  // invariant density on Y
    std::vector<double> compose_target_;           // F(node)
};

}  // namespace

TransferOperator TransferOperator::exact_doubling() {
    return TransferOperator(std::make_shared<DoublingImpl>());
}

TransferOperator TransferOperator::grid_gibbs_markov(const InducedMap& induced,
                                                     int grid_size,
                                                     double weight_cutoff) {
    return TransferOperator(
        std::make_shared<GibbsMarkovImpl>(induced, grid_size, weight_cutoff));
}

Func TransferOperator::apply(const Func& v) const { return impl_->apply(v); }
Func TransferOperator::compose_map(const Func& v) const { return impl_->compose(v); }
double TransferOperator::integrate(const Func& v) const { return impl_->integrate(v); }
double TransferOperator::integrate_product(const Func& f, const Func& g) const {
    return impl_->integrate_product(f, g);
}
double TransferOperator::sup_norm(const Func& v) const { return impl_->sup_norm(v); }
bool TransferOperator::is_exact_doubling() const { return impl_->exact_doubling(); }
int TransferOperator::branch_count() const { return impl_->branches(); }
int TransferOperator::grid_size() const { return impl_->grid(); }
std::string TransferOperator::describe() const { return impl_->describe(); }

Func TransferOperator::centered(const Func& v) const {
    const double mean = integrate(v);
    if (v.is_trig()) {
        TrigPoly p = v.trig();
        return Func(TrigPoly(p.constant_term() - mean, p.terms()));
    }
    GridTable g = v.grid();
    for (double& x : g.values()) x -= mean;
    return Func(std::move(g));
}

namespace {

Func func_sub_const(const Func& f, double c) {
    if (f.is_trig()) {
        const TrigPoly& p = f.trig();
        return Func(TrigPoly(p.constant_term() - c, p.terms()));
    }
    GridTable g = f.grid();
    for (double& x : g.values()) x -= c;
    return Func(std::move(g));
}

Func func_add(const Func& a, const Func& b) {
    if (a.is_trig() && b.is_trig()) {
        TrigPoly p = a.trig();
        p += b.trig();
        return Func(std::move(p));
    }
    const GridTable& ga = a.grid();
    GridTable out = ga;
    for (int i = 0; i <= ga.cells(); ++i) out.values()[i] += b(ga.node(i));
    return Func(std::move(out));
}

Func func_sub(const Func& a, const Func& b) {
    if (a.is_trig() && b.is_trig()) return Func(a.trig() - b.trig());
    const GridTable& ga = a.grid();
    GridTable out = ga;
    for (int i = 0; i <= ga.cells(); ++i) out.values()[i] -= b(ga.node(i));
    return Func(std::move(out));
}

Func func_product(const Func& a, const Func& b) {
    if (a.is_trig() && b.is_trig()) return Func(a.trig().product(b.trig()));
    const GridTable& ga = a.is_trig() ? b.grid() : a.grid();
    GridTable out = ga;
    for (int i = 0; i <= ga.cells(); ++i) {
        const double x = ga.node(i);
        out.values()[i] = a(x) * b(x);
    }
    return Func(std::move(out));
}

}  // namespace

Decomposition primary_decomposition(const TransferOperator& op,
                                    const std::vector<Func>& v, double tol) {
    if (v.empty()) throw std::invalid_argument("empty observable");
    for (const Func& c : v)
        if (std::fabs(op.integrate(c)) >= 1e-8)
            throw std::invalid_argument(
                "observable must be mean-zero (|mean| < 1e-8) for decomposition");

    const int dim = static_cast<int>(v.size());
    constexpr int kHardCap = 200;
    constexpr int kStallLimit = 50;

    Decomposition d;
    d.m.reserve(v.size());
    d.chi.reserve(v.size());
    int max_K = 0;

    for (const Func& comp : v) {
        Func chi = func_sub(comp, comp);  // zero of the same representation
        Func iterate = comp;
        double best = op.sup_norm(iterate);
        int stall = 0;
        int K = 0;
        for (int k = 1; k <= kHardCap; ++k) {
            iterate = op.apply(iterate);
            const double norm = op.sup_norm(iterate);
            if (norm < tol) break;
            chi = func_add(chi, iterate);
            K = k;
            if (norm < best) {
                best = norm;
                stall = 0;
            } else if (++stall >= kStallLimit) {
                throw NoDecay("transfer-operator iterates stopped decreasing at k=" +
                              std::to_string(k) + " (sup " + std::to_string(norm) +
                              "); observable not mean-zero or operator misconfigured");
            }
        }
        Func m = func_add(func_sub(comp, op.compose_map(chi)), chi);
        // P m = P v + P chi - chi by duality (P(chi o T) = chi); this route
        // only touches continuous functions, so grid tables do not smear the
        // genuine jump of m at branch boundaries into the reported residual
        const Func pm = func_sub(func_add(op.apply(comp), op.apply(chi)), chi);
        d.residual = std::max(d.residual, op.sup_norm(pm));
        d.m.push_back(std::move(m));
        d.chi.push_back(std::move(chi));
        max_K = std::max(max_K, K);
    }
    d.truncation_K = max_K;

    d.sigma = Matrix(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            const double s = op.integrate_product(d.m[i], d.m[j]);
            d.sigma(i, j) = s;
            d.sigma(j, i) = s;
        }
    return d;
}

std::vector<Func> secondary_decomposition(const TransferOperator& op,
                                          const Decomposition& d) {
    const int n = d.dim();
    std::vector<Func> phi;
    phi.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Func prod = func_product(d.m[i], d.m[j]);
            Func comp = op.compose_map(op.apply(prod));
            phi.push_back(func_sub_const(comp, d.sigma(i, j)));
        }
    return phi;
}

Matrix green_kubo_sigma(const OrbitSampler& sampler, const MapObservable& v,
                        int max_lag, std::size_t orbit_len, bool* clamped) {
    if (max_lag < 0) throw std::invalid_argument("max_lag must be >= 0");
    const std::size_t L = static_cast<std::size_t>(max_lag);
    if (orbit_len < 10 * (L + 1))
        throw std::invalid_argument("orbit_len must be much larger than max_lag");
    const int n = v.dim;
    const std::size_t nn = static_cast<std::size_t>(n);

    // raw lag sums P_k = sum_t v_{t-k} v_t^T, plus head/tail partial sums for
    // exact centering
    std::vector<Matrix> raw(L + 1, Matrix(n));
    std::vector<double> ring((L + 1) * nn, 0.0);
    std::vector<double> head(L * nn, 0.0);
    std::vector<double> total(nn, 0.0);
    std::vector<double> cur(nn);

    std::size_t t = 0;
    sampler.visit(orbit_len, [&](double x) {
        v.eval(x, cur.data());
        double* slot = ring.data() + (t % (L + 1)) * nn;
        for (std::size_t c = 0; c < nn; ++c) slot[c] = cur[c];
        if (t < L)
            for (std::size_t c = 0; c < nn; ++c) head[t * nn + c] = cur[c];
        const std::size_t kmax = std::min(t, L);
        for (std::size_t k = 0; k <= kmax; ++k) {
            const double* prev = ring.data() + ((t - k) % (L + 1)) * nn;
            Matrix& acc = raw[k];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) acc(i, j) += prev[i] * cur[j];
        }
        for (std::size_t c = 0; c < nn; ++c) total[c] += cur[c];
        ++t;
    });

    std::vector<double> mean(nn);
    for (std::size_t c = 0; c < nn; ++c) mean[c] = total[c] / static_cast<double>(orbit_len);

    // partial sums of the first k and last k observations
    auto head_sum = [&](std::size_t k, std::size_t c) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += head[i * nn + c];
        return s;
    };
    auto tail_sum = [&](std::size_t k, std::size_t c) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += ring[((orbit_len - 1 - i) % (L + 1)) * nn + c];
        return s;
    };

    Matrix sigma(n);
    for (std::size_t k = 0; k <= L; ++k) {
        const double cnt = static_cast<double>(orbit_len - k);
        Matrix C(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double s_head = total[static_cast<std::size_t>(i)] -
                                      tail_sum(k, static_cast<std::size_t>(i));
                const double s_tail = total[static_cast<std::size_t>(j)] -
                                      head_sum(k, static_cast<std::size_t>(j));
                C(i, j) = (raw[k](i, j) - s_head * mean[static_cast<std::size_t>(j)] -
                           mean[static_cast<std::size_t>(i)] * s_tail +
                           cnt * mean[static_cast<std::size_t>(i)] *
                               mean[static_cast<std::size_t>(j)]) /
                          cnt;
            }
        if (k == 0) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) sigma(i, j) += C(i, j);
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) sigma(i, j) += C(i, j) + C(j, i);
        }
    }

    double changed = 0.0;
    Matrix repaired = clamp_psd(sigma.symmetrized(), &changed);
    if (clamped) *clamped = changed > 0.0;
    return repaired;
}

nlohmann::json Decomposition::to_json() const {
    nlohmann::json j;
    auto func_json = [](const Func& f) {
        nlohmann::json out;
        if (f.is_trig()) {
            out["rep"] = "trig";
            out["c0"] = f.trig().constant_term();
            nlohmann::json terms = nlohmann::json::array();
            for (const auto& t : f.trig().terms())
                terms.push_back({{"k", t.k}, {"a", t.a}, {"b", t.b}});
            out["terms"] = terms;
        } else {
            out["rep"] = "grid";
            out["lo"] = f.grid().lo();
            out["hi"] = f.grid().hi();
            out["values"] = f.grid().values();
        }
        return out;
    };
    j["dim"] = dim();
    j["m"] = nlohmann::json::array();
    j["chi"] = nlohmann::json::array();
    for (const Func& f : m) j["m"].push_back(func_json(f));
    for (const Func& f : chi) j["chi"].push_back(func_json(f));
    nlohmann::json sig = nlohmann::json::array();
    for (int i = 0; i < sigma.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < sigma.dim(); ++k) row.push_back(sigma(i, k));
        sig.push_back(row);
    }
    j["sigma"] = sig;
    j["residual"] = residual;
    j["truncation_K"] = truncation_K;
    return j;
}

FlowDecomposition::FlowDecomposition(const SuspensionFlow& flow, const FlowObservable& v,
                                     int grid_size, double tol)
    : flow_(flow), v_(v), quad_step_(SuspensionFlow::kDefaultQuadratureStep) {
    if (flow.base().kind() != MapKind::Doubling)
        throw std::invalid_argument(
            "flow decomposition is implemented for the doubling-base testbed");
    if (v.dim > 8) throw std::invalid_argument("observable dimension too large");

    // induced observable v'(x), one grid table per component
    std::vector<std::vector<double>> tables(static_cast<std::size_t>(v.dim));
    for (auto& t : tables) t.resize(static_cast<std::size_t>(grid_size) + 1);
    std::vector<double> buf(static_cast<std::size_t>(v.dim));
    for (int i = 0; i <= grid_size; ++i) {
        const double x = static_cast<double>(i) / grid_size;
        flow.induced_observable(v, x, buf.data(), quad_step_);
        for (int c = 0; c < v.dim; ++c)
            tables[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = buf[static_cast<std::size_t>(c)];
    }
    std::vector<Func> induced_obs;
    induced_obs.reserve(tables.size());
    for (auto& t : tables) induced_obs.emplace_back(GridTable(0.0, 1.0, std::move(t)));

    TransferOperator op = TransferOperator::exact_doubling();
    induced_ = primary_decomposition(op, induced_obs, tol);

    roof_mean_ = flow.roof().mean_lebesgue();
    sigma_ = Matrix(v.dim);
    for (int i = 0; i < v.dim; ++i)
        for (int j = 0; j < v.dim; ++j) sigma_(i, j) = induced_.sigma(i, j) / roof_mean_;
}

void FlowDecomposition::eval_m(double y, double u, double* out) const {
    const double r = flow_.roof()(y);
    const bool in_strip = (u >= r - 1.0 && u < r);
    for (int c = 0; c < dim(); ++c) out[c] = in_strip ? induced_.m[static_cast<std::size_t>(c)](y) : 0.0;
}

void FlowDecomposition::eval_chi(double y, double u, double* out) const {
    for (int c = 0; c < dim(); ++c) out[c] = induced_.chi[static_cast<std::size_t>(c)](y);
    if (u <= 0.0) return;
    if (v_.height_independent) {
        double val[8];
        v_.eval(y, 0.0, val);
        for (int c = 0; c < dim(); ++c) out[c] += val[c] * u;
        return;
    }
    // Simpson over [0, u]
    double acc[8] = {0.0};
    const long half = std::max(1L, static_cast<long>(std::ceil(u / (2.0 * quad_step_))));
    const long mseg = 2 * half;
    const double h = u / static_cast<double>(mseg);
    double val[8];
    for (long i = 0; i <= mseg; ++i) {
        const double s = (i == mseg) ? u : h * static_cast<double>(i);
        v_.eval(y, s, val);
        const double w = (i == 0 || i == mseg) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        for (int c = 0; c < dim(); ++c) acc[c] += w * val[c];
    }
    for (int c = 0; c < dim(); ++c) out[c] += acc[c] * h / 3.0;
}

void FlowDecomposition::eval_psi(double y, double u, double* out) const {
    flow_.flow_integral(v_, y, u, 1.0, quad_step_, out);
}

void FlowDecomposition::eval_transfer_m(double y, double u, double* out) const {
    if (u >= 1.0) {
        eval_m(y, u - 1.0, out);
        return;
    }
    // weighted branch sum at height u - 1 + r(y_j) over the two doubling branches
    double tmp[8];
    for (int c = 0; c < dim(); ++c) out[c] = 0.0;
    for (double pre : {0.5 * y, 0.5 * (y + 1.0)}) {
        eval_m(pre, u - 1.0 + flow_.roof()(pre), tmp);
        for (int c = 0; c < dim(); ++c) out[c] += 0.5 * tmp[c];
    }
}

}  // namespace ratelab
