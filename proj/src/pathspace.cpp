#include "ratelab/pathspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ratelab/errors.hpp"

namespace ratelab {

namespace {

void check_times(const std::vector<double>& t) {
    if (t.size() < 2) throw std::invalid_argument("path needs at least 2 nodes");
    if (t.front() != 0.0 || t.back() != 1.0)
        throw std::invalid_argument("path nodes must include 0 and 1");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw std::invalid_argument("path node times must be strictly increasing");
}

}  // namespace

PiecewisePath PiecewisePath::from_increments(std::vector<double> times,
                                             std::vector<double> start_value,
                                             std::vector<double> increments, int dim) {
    check_times(times);
    const std::size_t n = times.size();
    const std::size_t nd = static_cast<std::size_t>(dim);
    if (start_value.size() != nd) throw std::invalid_argument("start value size mismatch");
    if (increments.size() != (n - 1) * nd)
        throw std::invalid_argument("increment count mismatch");
    PiecewisePath p;
    p.dim_ = dim;
    p.times_ = std::move(times);
    p.start_ = std::move(start_value);
    p.increments_ = std::move(increments);
    p.values_.resize(n * nd);
    for (std::size_t c = 0; c < nd; ++c) p.values_[c] = p.start_[c];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t c = 0; c < nd; ++c)
            p.values_[i * nd + c] =
                p.values_[(i - 1) * nd + c] + p.increments_[(i - 1) * nd + c];
    return p;
}

PiecewisePath PiecewisePath::from_values(std::vector<double> times,
                                         std::vector<double> values, int dim) {
    check_times(times);
    const std::size_t n = times.size();
    const std::size_t nd = static_cast<std::size_t>(dim);
    if (values.size() != n * nd) throw std::invalid_argument("value count mismatch");
    PiecewisePath p;
    p.dim_ = dim;
    p.times_ = std::move(times);
    p.start_.assign(values.begin(), values.begin() + static_cast<long>(nd));
    p.increments_.resize((n - 1) * nd);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t c = 0; c < nd; ++c)
            p.increments_[i * nd + c] = values[(i + 1) * nd + c] - values[i * nd + c];
    p.values_ = std::move(values);
    return p;
}

PiecewisePath PiecewisePath::zero(int dim) {
    const std::size_t nd = static_cast<std::size_t>(dim);
    return from_increments({0.0, 1.0}, std::vector<double>(nd, 0.0),
                           std::vector<double>(nd, 0.0), dim);
}

void PiecewisePath::eval(double t, double* out) const {
    const std::size_t nd = static_cast<std::size_t>(dim_);
    if (t <= times_.front()) {
        for (std::size_t c = 0; c < nd; ++c) out[c] = values_[c];
        return;
    }
    if (t >= times_.back()) {
        const double* v = value(nodes() - 1);
        for (std::size_t c = 0; c < nd; ++c) out[c] = v[c];
        return;
    }
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    if (times_[lo] == t) {
        const double* v = value(lo);
        for (std::size_t c = 0; c < nd; ++c) out[c] = v[c];
        return;
    }
    const double frac = (t - times_[lo]) / (times_[hi] - times_[lo]);
    const double* vl = value(lo);
    const double* vh = value(hi);
    for (std::size_t c = 0; c < nd; ++c) out[c] = vl[c] + frac * (vh[c] - vl[c]);
}

double PiecewisePath::eval1(double t) const {
    double v;
    eval(t, &v);
    return v;
}

PiecewisePath PiecewisePath::restricted(const std::vector<double>& new_times) const {
    const std::size_t nd = static_cast<std::size_t>(dim_);
    std::vector<double> vals(new_times.size() * nd);
    for (std::size_t i = 0; i < new_times.size(); ++i) eval(new_times[i], &vals[i * nd]);
    return from_values(new_times, std::move(vals), dim_);
}

bool PiecewisePath::identical(const PiecewisePath& other) const {
    return dim_ == other.dim_ && times_ == other.times_ && values_ == other.values_;
}

EmpiricalPathMeasure::EmpiricalPathMeasure(std::vector<PiecewisePath> p)
    : paths(std::move(p)) {
    if (paths.empty()) throw std::invalid_argument("empirical measure needs >= 1 path");
    for (const auto& path : paths)
        if (path.dim() != paths.front().dim())
            throw std::invalid_argument("paths must share a dimension");
}

PiecewisePath build_Bn(const std::vector<double>& orbit, const MapObservable& v,
                       std::size_t n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (orbit.size() < n) throw std::invalid_argument("orbit shorter than n");
    const std::size_t nd = static_cast<std::size_t>(v.dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> times(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        times[k] = static_cast<double>(k) / static_cast<double>(n);
    std::vector<double> inc(n * nd);
    std::vector<double> buf(nd);
    for (std::size_t k = 0; k < n; ++k) {
        v.eval(orbit[k], buf.data());
        for (std::size_t c = 0; c < nd; ++c) inc[k * nd + c] = buf[c] * scale;
    }
    return PiecewisePath::from_increments(std::move(times), std::vector<double>(nd, 0.0),
                                          std::move(inc), v.dim);
}

PiecewisePath build_Wn(const SuspensionFlow& flow, const FlowObservable& v,
                       const std::vector<double>& base_orbit, double u0, double n,
                       int d, double dt) {
    if (d < 2) throw std::invalid_argument("grid d must be >= 2");
    if (!(n > 0.0)) throw std::invalid_argument("n must be > 0");
    const std::size_t nd = static_cast<std::size_t>(v.dim);
    std::vector<double> times(static_cast<std::size_t>(d) + 1);
    std::vector<double> node_times(static_cast<std::size_t>(d) + 1);
    for (int i = 0; i <= d; ++i) {
        times[static_cast<std::size_t>(i)] = static_cast<double>(i) / d;
        node_times[static_cast<std::size_t>(i)] = n * static_cast<double>(i) / d;
    }
    std::vector<double> cumulative((static_cast<std::size_t>(d) + 1) * nd);
    flow.flow_integral_cumulative(v, base_orbit, u0, node_times, dt, cumulative.data());
    const double scale = 1.0 / std::sqrt(n);
    std::vector<double> inc(static_cast<std::size_t>(d) * nd);
    for (int i = 0; i < d; ++i)
        for (std::size_t c = 0; c < nd; ++c) {
            const std::size_t hi = (static_cast<std::size_t>(i) + 1) * nd + c;
            const std::size_t lo = static_cast<std::size_t>(i) * nd + c;
            inc[static_cast<std::size_t>(i) * nd + c] =
                (cumulative[hi] - cumulative[lo]) * scale;
        }
    return PiecewisePath::from_increments(std::move(times), std::vector<double>(nd, 0.0),
                                          std::move(inc), v.dim);
}

PiecewisePath sample_brownian(const Matrix& sigma, int d, SplitMix64& rng) {
    if (d < 1) throw std::invalid_argument("grid d must be >= 1");
    const int n = sigma.dim();
    double changed = 0.0;
    Matrix repaired = clamp_psd(sigma, &changed);
    if (changed > 1e-6)
        throw NotPSD("covariance repair changed entries by " + std::to_string(changed));
    Matrix root = psd_square_root(repaired);

    const std::size_t nd = static_cast<std::size_t>(n);
    std::vector<double> times(static_cast<std::size_t>(d) + 1);
    for (int i = 0; i <= d; ++i) times[static_cast<std::size_t>(i)] = static_cast<double>(i) / d;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<double> inc(static_cast<std::size_t>(d) * nd);
    std::vector<double> z(nd);
    for (int i = 0; i < d; ++i) {
        for (std::size_t c = 0; c < nd; ++c) z[c] = rng.next_gaussian() * scale;
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int c = 0; c < n; ++c) s += root(r, c) * z[static_cast<std::size_t>(c)];
            inc[static_cast<std::size_t>(i) * nd + static_cast<std::size_t>(r)] = s;
        }
    }
    return PiecewisePath::from_increments(std::move(times), std::vector<double>(nd, 0.0),
                                          std::move(inc), n);
}

PiecewisePath sample_brownian(const Matrix& sigma, int d, std::uint64_t seed) {
    SplitMix64 rng(seed);
    return sample_brownian(sigma, d, rng);
}

PiecewisePath h_reversal(const PiecewisePath& path) {
    const std::size_t n = path.nodes();
    const std::size_t nd = static_cast<std::size_t>(path.dim());
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) times[i] = 1.0 - path.time(n - 1 - i);
    times.front() = 0.0;
    times.back() = 1.0;
    // (h f)(0) = 0 exactly; segment increments are reversed in order
    std::vector<double> inc((n - 1) * nd);
    const std::vector<double>& src = path.increments();
    for (std::size_t seg = 0; seg + 1 < n; ++seg) {
        const std::size_t from = (n - 2 - seg) * nd;
        for (std::size_t c = 0; c < nd; ++c) inc[seg * nd + c] = src[from + c];
    }
    return PiecewisePath::from_increments(std::move(times), std::vector<double>(nd, 0.0),
                                          std::move(inc), path.dim());
}

double sup_distance(const PiecewisePath& a, const PiecewisePath& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("sup_distance needs paths of equal dimension");
    const std::size_t nd = static_cast<std::size_t>(a.dim());
    std::vector<double> va(nd), vb(nd);
    double best = 0.0;
    auto consider = [&](double t) {
        a.eval(t, va.data());
        b.eval(t, vb.data());
        double s = 0.0;
        for (std::size_t c = 0; c < nd; ++c) {
            const double dv = va[c] - vb[c];
            s += dv * dv;
        }
        best = std::max(best, s);
    };
    std::size_t i = 0, j = 0;
    while (i < a.nodes() || j < b.nodes()) {
        double t;
        if (j >= b.nodes() || (i < a.nodes() && a.time(i) <= b.time(j))) {
            t = a.time(i);
            if (j < b.nodes() && b.time(j) == t) ++j;
            ++i;
        } else {
            t = b.time(j);
            ++j;
        }
        consider(t);
    }
    return std::sqrt(best);
}

void write_paths_csv(std::ostream& os, const std::vector<PiecewisePath>& paths) {
    if (paths.empty()) throw std::invalid_argument("no paths to write");
    const int dim = paths.front().dim();
    os << "path,t";
    for (int c = 1; c <= dim; ++c) os << ",v" << c;
    os << "\n";
    char buf[32];
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const PiecewisePath& path = paths[p];
        if (path.dim() != dim) throw std::invalid_argument("mixed path dimensions");
        for (std::size_t i = 0; i < path.nodes(); ++i) {
            os << p;
            std::snprintf(buf, sizeof buf, "%.17g", path.time(i));
            os << ',' << buf;
            const double* v = path.value(i);
            for (int c = 0; c < dim; ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", v[c]);
                os << ',' << buf;
            }
            os << "\n";
        }
    }
}

std::vector<PiecewisePath> read_paths_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("empty CSV");
    // header: path,t,v1..vN
    int dim = -1;
    {
        int commas = 0;
        for (char ch : line)
            if (ch == ',') ++commas;
        dim = commas - 1;
    }
    if (dim < 1) throw std::invalid_argument("bad CSV header");
    std::vector<PiecewisePath> out;
    std::vector<double> times, values;
    long current = -1;
    auto flush = [&]() {
        if (current >= 0)
            out.push_back(PiecewisePath::from_values(times, values, dim));
        times.clear();
        values.clear();
    };
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        const long idx = std::stol(cell);
        if (idx != current) {
            flush();
            current = idx;
        }
        std::getline(row, cell, ',');
        times.push_back(std::stod(cell));
        for (int c = 0; c < dim; ++c) {
            std::getline(row, cell, ',');
            values.push_back(std::stod(cell));
        }
    }
    flush();
    return out;
}

}  // namespace ratelab
