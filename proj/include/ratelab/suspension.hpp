#ifndef RATELAB_SUSPENSION_HPP
#define RATELAB_SUSPENSION_HPP

#include <functional>
#include <vector>

#include "ratelab/dynsys.hpp"

namespace ratelab {

// Roof function r: [0,1] -> [1,inf). Either affine r(x) = a + b x or a table
// on a uniform grid with linear interpolation. Construction rejects roofs
// with inf r < 1.
class RoofFunction {
public:
    static RoofFunction affine(double a, double b);
    static RoofFunction tabulated(std::vector<double> node_values);

    double operator()(double x) const;
    double min_value() const { return min_; }
    double max_value() const { return max_; }
    double mean_lebesgue() const;  // integral over [0,1] of the roof

    bool is_affine() const { return table_.empty(); }
    double affine_a() const { return a_; }
    double affine_b() const { return b_; }

private:
    RoofFunction() = default;
    double a_ = 0.0, b_ = 0.0;
    std::vector<double> table_;
    double min_ = 0.0, max_ = 0.0;
};

// Observable on the suspension space {(x,u): 0 <= u < r(x)}, R^N-valued.
// height_independent marks v(x,u) = v(x), which allows closed-form lap
// integrals instead of quadrature.
struct FlowObservable {
    int dim = 1;
    std::function<void(double x, double u, double* out)> eval;
    bool height_independent = false;
    bool declared_mean_zero = false;

    static FlowObservable scalar(std::function<double(double, double)> f,
                                 bool height_independent = false,
                                 bool declared_mean_zero = false);
};

// Suspension semiflow over a base interval map under a roof function:
// (x,u) flows up at unit speed and jumps to (Tx, 0) when u reaches r(x).
class SuspensionFlow {
public:
    static constexpr double kDefaultQuadratureStep = 1.0 / 64.0;

    SuspensionFlow(MapSystem base, RoofFunction roof)
        : base_(base), roof_(std::move(roof)) {}

    const MapSystem& base() const { return base_; }
    const RoofFunction& roof() const { return roof_; }

    // Number of roof crossings: the N with r_N(x) <= t+u < r_{N+1}(x),
    // where r_k is the Birkhoff sum of the roof along the base orbit.
    // Iterates the base map directly; meant for moderate t.
    long lap_number(double x, double u, double t) const;

    struct Point {
        double x, u;
    };
    Point flow_point(double x, double u, double t) const;

    // Integral of s -> v(flow_s(x,u)) over [0, t_end], composite Simpson with
    // step dt on each lap segment; lap boundaries are exact split points.
    void flow_integral(const FlowObservable& v, double x, double u, double t_end,
                       double dt, double* out) const;

    // v_X(x): integral of v along one full lap from (x, 0).
    void induced_observable(const FlowObservable& v, double x, double* out,
                            double dt = kDefaultQuadratureStep) const;

    // Cumulative integrals along a precomputed base orbit, starting from
    // (orbit[0], u0): out[j] = integral over [0, node_times[j]]. node_times
    // must be nondecreasing; the orbit must cover the needed laps. Used for
    // long horizons where the base orbit comes from OrbitSampler.
    void flow_integral_cumulative(const FlowObservable& v,
                                  const std::vector<double>& orbit, double u0,
                                  const std::vector<double>& node_times, double dt,
                                  double* out) const;

    // Laps needed to flow for time t from height u0: a safe orbit length for
    // flow_integral_cumulative.
    std::size_t orbit_length_for(double t, double u0 = 0.0) const;

private:
    void check_start(double x, double u) const;
    MapSystem base_;
    RoofFunction roof_;
};

}  // namespace ratelab

#endif
