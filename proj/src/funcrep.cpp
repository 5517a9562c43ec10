#include "ratelab/funcrep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ratelab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TrigPoly::TrigPoly(double c0, std::vector<Term> terms) : c0_(c0), terms_(std::move(terms)) {
    normalize();
}

TrigPoly TrigPoly::cosine(int k, double amplitude) {
    return TrigPoly(0.0, {Term{k, amplitude, 0.0}});
}

TrigPoly TrigPoly::sine(int k, double amplitude) {
    return TrigPoly(0.0, {Term{k, 0.0, amplitude}});
}

void TrigPoly::normalize() {
    std::map<int, Term> merged;
    for (const Term& t : terms_) {
        if (t.k < 1) throw std::invalid_argument("trig frequency must be >= 1");
        auto it = merged.emplace(t.k, Term{t.k, 0.0, 0.0}).first;
        it->second.a += t.a;
        it->second.b += t.b;
    }
    terms_.clear();
    for (const auto& [k, t] : merged)
        if (t.a != 0.0 || t.b != 0.0) terms_.push_back(t);
}

double TrigPoly::operator()(double x) const {
    double s = c0_;
    for (const Term& t : terms_) {
        const double ang = kTwoPi * t.k * x;
        s += t.a * std::cos(ang) + t.b * std::sin(ang);
    }
    return s;
}

TrigPoly TrigPoly::transfer_doubling() const {
    std::vector<Term> out;
    for (const Term& t : terms_)
        if (t.k % 2 == 0) out.push_back(Term{t.k / 2, t.a, t.b});
    return TrigPoly(c0_, std::move(out));
}

TrigPoly TrigPoly::compose_doubling() const {
    std::vector<Term> out;
    for (const Term& t : terms_) out.push_back(Term{2 * t.k, t.a, t.b});
    return TrigPoly(c0_, std::move(out));
}

TrigPoly TrigPoly::product(const TrigPoly& other) const {
    // via complex coefficients: v = sum c_k e^{2 pi i k x}, product = convolution
    std::map<int, std::pair<double, double>> c1, c2, prod;  // k >= 0 half-spectrum
    auto to_complex = [](const TrigPoly& p, std::map<int, std::pair<double, double>>& c) {
        c[0] = {p.c0_, 0.0};
        for (const Term& t : p.terms_) c[t.k] = {0.5 * t.a, -0.5 * t.b};
    };
    to_complex(*this, c1);
    to_complex(other, c2);
    auto conj_at = [](const std::map<int, std::pair<double, double>>& c, int k)
        -> std::pair<double, double> {
        auto it = c.find(std::abs(k));
        if (it == c.end()) return {0.0, 0.0};
        auto [re, im] = it->second;
        return k >= 0 ? std::pair{re, im} : std::pair{re, -im};
    };
    int kmax1 = terms_.empty() ? 0 : terms_.back().k;
    int kmax2 = other.terms_.empty() ? 0 : other.terms_.back().k;
    for (int k = 0; k <= kmax1 + kmax2; ++k) {
        double re = 0.0, im = 0.0;
        for (int j = -kmax2; j <= kmax2; ++j) {
            auto [ar, ai] = conj_at(c1, k - j);
            auto [br, bi] = conj_at(c2, j);
            re += ar * br - ai * bi;
            im += ar * bi + ai * br;
        }
        if (re != 0.0 || im != 0.0) prod[k] = {re, im};
    }
    double c0 = prod.count(0) ? prod[0].first : 0.0;
    std::vector<Term> out;
    for (const auto& [k, c] : prod)
        if (k >= 1) out.push_back(Term{k, 2.0 * c.first, -2.0 * c.second});
    return TrigPoly(c0, std::move(out));
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& other) {
    c0_ += other.c0_;
    for (const Term& t : other.terms_) terms_.push_back(t);
    normalize();
    return *this;
}

TrigPoly TrigPoly::operator-(const TrigPoly& other) const {
    TrigPoly r = *this;
    r.c0_ -= other.c0_;
    for (const Term& t : other.terms_) r.terms_.push_back(Term{t.k, -t.a, -t.b});
    r.normalize();
    return r;
}

double TrigPoly::sup_bound() const {
    double s = std::fabs(c0_);
    for (const Term& t : terms_) s += std::hypot(t.a, t.b);
    return s;
}

bool TrigPoly::is_zero(double tol) const {
    if (std::fabs(c0_) > tol) return false;
    for (const Term& t : terms_)
        if (std::fabs(t.a) > tol || std::fabs(t.b) > tol) return false;
    return true;
}

GridTable::GridTable(double lo, double hi, std::vector<double> node_values)
    : lo_(lo), hi_(hi), values_(std::move(node_values)) {
    if (!(hi_ > lo_)) throw std::invalid_argument("grid needs hi > lo");
    if (values_.size() < 2) throw std::invalid_argument("grid needs >= 2 nodes");
}

GridTable GridTable::sampled(double lo, double hi, int grid_size,
                             const std::function<double(double)>& f) {
    if (grid_size < 1) throw std::invalid_argument("grid size must be >= 1");
    std::vector<double> vals(static_cast<std::size_t>(grid_size) + 1);
    for (int i = 0; i <= grid_size; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / grid_size;
        vals[static_cast<std::size_t>(i)] = f(x);
    }
    return GridTable(lo, hi, std::move(vals));
}

double GridTable::node(int i) const {
    return lo_ + (hi_ - lo_) * static_cast<double>(i) / cells();
}

double GridTable::operator()(double x) const {
    const int n = cells();
    double pos = (x - lo_) / (hi_ - lo_) * static_cast<double>(n);
    if (pos <= 0.0) return values_.front();
    if (pos >= static_cast<double>(n)) return values_.back();
    int i = static_cast<int>(pos);
    if (i >= n) i = n - 1;
    const double frac = pos - static_cast<double>(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

double GridTable::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
}

double Func::operator()(double x) const {
    return std::visit([x](const auto& r) { return r(x); }, rep_);
}

MapObservable MapObservable::scalar(std::function<double(double)> f) {
    MapObservable v;
    v.dim = 1;
    v.eval = [f = std::move(f)](double x, double* out) { out[0] = f(x); };
    return v;
}

MapObservable MapObservable::components(std::vector<Func> fs) {
    if (fs.empty()) throw std::invalid_argument("observable needs >= 1 component");
    MapObservable v;
    v.dim = static_cast<int>(fs.size());
    v.eval = [fs = std::move(fs)](double x, double* out) {
        for (std::size_t i = 0; i < fs.size(); ++i) out[i] = fs[i](x);
    };
    return v;
}

}  // namespace ratelab
