#include "ratelab/suspension.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ratelab {

namespace {
constexpr int kMaxDim = 8;
}

RoofFunction RoofFunction::affine(double a, double b) {
    RoofFunction r;
    r.a_ = a;
    r.b_ = b;
    r.min_ = std::min(a, a + b);
    r.max_ = std::max(a, a + b);
    if (r.min_ < 1.0) throw std::invalid_argument("roof must satisfy inf r >= 1");
    return r;
}

RoofFunction RoofFunction::tabulated(std::vector<double> node_values) {
    if (node_values.size() < 2)
        throw std::invalid_argument("tabulated roof needs at least 2 nodes");
    RoofFunction r;
    r.table_ = std::move(node_values);
    r.min_ = *std::min_element(r.table_.begin(), r.table_.end());
    r.max_ = *std::max_element(r.table_.begin(), r.table_.end());
    if (r.min_ < 1.0) throw std::invalid_argument("roof must satisfy inf r >= 1");
    return r;
}

double RoofFunction::operator()(double x) const {
    if (table_.empty()) return a_ + b_ * x;
    const std::size_t cells = table_.size() - 1;
    double pos = x * static_cast<double>(cells);
    std::size_t i = static_cast<std::size_t>(pos);
    if (i >= cells) i = cells - 1;
    const double frac = pos - static_cast<double>(i);
    return table_[i] + frac * (table_[i + 1] - table_[i]);
}

double RoofFunction::mean_lebesgue() const {
    if (table_.empty()) return a_ + 0.5 * b_;
    // trapezoid over the table nodes: exact for the interpolant
    double s = 0.0;
    const std::size_t cells = table_.size() - 1;
    for (std::size_t i = 0; i < cells; ++i) s += 0.5 * (table_[i] + table_[i + 1]);
    return s / static_cast<double>(cells);
}

FlowObservable FlowObservable::scalar(std::function<double(double, double)> f,
                                      bool height_independent,
                                      bool declared_mean_zero) {
    FlowObservable v;
    v.dim = 1;
    v.eval = [f = std::move(f)](double x, double u, double* out) { out[0] = f(x, u); };
    v.height_independent = height_independent;
    v.declared_mean_zero = declared_mean_zero;
    return v;
}

void SuspensionFlow::check_start(double x, double u) const {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("base point outside [0,1]");
    if (!(u >= 0.0 && u < roof_(x)))
        throw std::invalid_argument("height outside [0, r(x))");
}

long SuspensionFlow::lap_number(double x, double u, double t) const {
    check_start(x, u);
    if (t < 0.0) throw std::invalid_argument("time must be >= 0");
    const double target = t + u;
    double birkhoff = 0.0;
    double xc = x;
    long n = 0;
    for (;;) {
        const double next = birkhoff + roof_(xc);
        if (target < next) return n;
        birkhoff = next;
        xc = base_.step(xc);
        ++n;
    }
}

SuspensionFlow::Point SuspensionFlow::flow_point(double x, double u, double t) const {
    check_start(x, u);
    if (t < 0.0) throw std::invalid_argument("time must be >= 0");
    double s = t + u;
    double xc = x;
    while (s >= roof_(xc)) {
        s -= roof_(xc);
        xc = base_.step(xc);
    }
    if (s < 0.0) s = 0.0;  // guard against rounding at exact boundaries
    return Point{xc, s};
}

namespace {

// Composite Simpson of s -> v(x, s) over [a, b], accumulated into acc.
void add_segment(const FlowObservable& v, double x, double a, double b, double dt,
                 double* acc) {
    if (b <= a) return;
    if (v.height_independent) {
        double val[kMaxDim];
        v.eval(x, a, val);
        for (int c = 0; c < v.dim; ++c) acc[c] += val[c] * (b - a);
        return;
    }
    const double len = b - a;
    long half = static_cast<long>(std::ceil(len / (2.0 * dt)));
    if (half < 1) half = 1;
    const long m = 2 * half;
    const double h = len / static_cast<double>(m);
    double sum[kMaxDim] = {0.0};
    double val[kMaxDim];
    for (long i = 0; i <= m; ++i) {
        const double s = (i == m) ? b : a + h * static_cast<double>(i);
        v.eval(x, s, val);
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        for (int c = 0; c < v.dim; ++c) sum[c] += w * val[c];
    }
    for (int c = 0; c < v.dim; ++c) acc[c] += sum[c] * h / 3.0;
}

}  // namespace

void SuspensionFlow::flow_integral(const FlowObservable& v, double x, double u,
                                   double t_end, double dt, double* out) const {
    check_start(x, u);
    if (!(dt > 0.0)) throw std::invalid_argument("quadrature step must be > 0");
    if (v.dim > kMaxDim) throw std::invalid_argument("observable dimension too large");
    for (int c = 0; c < v.dim; ++c) out[c] = 0.0;
    if (t_end <= 0.0) return;

    double xc = x;
    double uc = u;
    double remaining = t_end;
    for (;;) {
        const double lap_left = roof_(xc) - uc;
        if (remaining < lap_left) {
            add_segment(v, xc, uc, uc + remaining, dt, out);
            return;
        }
        add_segment(v, xc, uc, roof_(xc), dt, out);
        remaining -= lap_left;
        xc = base_.step(xc);
        uc = 0.0;
        if (remaining <= 0.0) return;
    }
}

void SuspensionFlow::induced_observable(const FlowObservable& v, double x, double* out,
                                        double dt) const {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("base point outside [0,1]");
    if (v.dim > kMaxDim) throw std::invalid_argument("observable dimension too large");
    for (int c = 0; c < v.dim; ++c) out[c] = 0.0;
    add_segment(v, x, 0.0, roof_(x), dt, out);
}

std::size_t SuspensionFlow::orbit_length_for(double t, double u0) const {
    return static_cast<std::size_t>(std::ceil((t + u0) / roof_.min_value())) + 2;
}

void SuspensionFlow::flow_integral_cumulative(const FlowObservable& v,
                                              const std::vector<double>& orbit,
                                              double u0,
                                              const std::vector<double>& node_times,
                                              double dt, double* out) const {
    if (!(dt > 0.0)) throw std::invalid_argument("quadrature step must be > 0");
    if (v.dim > kMaxDim) throw std::invalid_argument("observable dimension too large");
    if (orbit.empty()) throw std::invalid_argument("empty base orbit");

    double acc[kMaxDim] = {0.0};
    std::size_t k = 0;      // lap index into the orbit
    double uc = u0;         // height within the current lap
    double elapsed = 0.0;   // flow time integrated so far
    for (std::size_t j = 0; j < node_times.size(); ++j) {
        if (j > 0 && node_times[j] < node_times[j - 1])
            throw std::invalid_argument("node times must be nondecreasing");
        double remaining = node_times[j] - elapsed;
        while (remaining > 0.0) {
            if (k >= orbit.size())
                throw std::invalid_argument("base orbit too short for requested time");
            const double lap_left = roof_(orbit[k]) - uc;
            if (remaining < lap_left) {
                add_segment(v, orbit[k], uc, uc + remaining, dt, acc);
                uc += remaining;
                remaining = 0.0;
            } else {
                add_segment(v, orbit[k], uc, roof_(orbit[k]), dt, acc);
                remaining -= lap_left;
                ++k;
                uc = 0.0;
            }
        }
        elapsed = node_times[j];
        for (int c = 0; c < v.dim; ++c) out[j * v.dim + c] = acc[c];
    }
}

}  // namespace ratelab
