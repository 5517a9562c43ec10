#ifndef RATELAB_FUNCREP_HPP
#define RATELAB_FUNCREP_HPP

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace ratelab {

// Trigonometric polynomial c0 + sum_k (a_k cos(2 pi k x) + b_k sin(2 pi k x)).
// Closed under the doubling map's transfer operator and under composition
// with the doubling map, with exact coefficient arithmetic; used as the exact
// oracle representation.
class TrigPoly {
public:
    struct Term {
        int k;  // frequency >= 1
        double a, b;
    };

    TrigPoly() = default;
    explicit TrigPoly(double c0, std::vector<Term> terms = {});
    static TrigPoly cosine(int k, double amplitude = 1.0);
    static TrigPoly sine(int k, double amplitude = 1.0);

    double operator()(double x) const;
    double constant_term() const { return c0_; }
    const std::vector<Term>& terms() const { return terms_; }

    // (Pv)(x) = (v(x/2) + v((x+1)/2)) / 2: frequencies halve, odd ones vanish.
    TrigPoly transfer_doubling() const;
    // v o T for the doubling map: frequencies double.
    TrigPoly compose_doubling() const;
    TrigPoly product(const TrigPoly& other) const;

    TrigPoly& operator+=(const TrigPoly& other);
    TrigPoly operator-(const TrigPoly& other) const;

    double mean_lebesgue() const { return c0_; }
    // |c0| + sum of harmonic amplitudes: an upper bound for the sup norm.
    double sup_bound() const;
    bool is_zero(double tol = 0.0) const;

private:
    void normalize();  // merge duplicate frequencies, drop zero terms
    double c0_ = 0.0;
    std::vector<Term> terms_;
};

// Uniform-grid table on [lo, hi] with linear interpolation between nodes
// (left-closed cells; for periodic observables the builder stores
// v(hi) = v(lo)).
class GridTable {
public:
    GridTable() = default;
    GridTable(double lo, double hi, std::vector<double> node_values);
    static GridTable sampled(double lo, double hi, int grid_size,
                             const std::function<double(double)>& f);

    double operator()(double x) const;
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int cells() const { return static_cast<int>(values_.size()) - 1; }
    double node(int i) const;
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double max_abs() const;

private:
    double lo_ = 0.0, hi_ = 1.0;
    std::vector<double> values_;
};

// A scalar function in either representation.
class Func {
public:
    Func() : rep_(TrigPoly()) {}
    Func(TrigPoly p) : rep_(std::move(p)) {}
    Func(GridTable t) : rep_(std::move(t)) {}

    bool is_trig() const { return std::holds_alternative<TrigPoly>(rep_); }
    const TrigPoly& trig() const { return std::get<TrigPoly>(rep_); }
    const GridTable& grid() const { return std::get<GridTable>(rep_); }

    double operator()(double x) const;

private:
    std::variant<TrigPoly, GridTable> rep_;
};

// R^N-valued observable on the interval, for orbit statistics and paths.
struct MapObservable {
    int dim = 1;
    std::function<void(double x, double* out)> eval;

    static MapObservable scalar(std::function<double(double)> f);
    static MapObservable components(std::vector<Func> fs);
};

}  // namespace ratelab

#endif
