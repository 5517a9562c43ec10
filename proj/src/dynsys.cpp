#include "ratelab/dynsys.hpp"

#include <cmath>
#include <stdexcept>

#include "ratelab/errors.hpp"

namespace ratelab {

MapSystem MapSystem::lsv(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("LSV gamma must lie in (0,1)");
    return MapSystem(MapKind::Lsv, gamma);
}

std::string MapSystem::name() const {
    if (kind_ == MapKind::Doubling) return "doubling";
    return "lsv(gamma=" + std::to_string(gamma_) + ")";
}

double MapSystem::step(double x) const {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("map argument outside [0,1]");
    if (kind_ == MapKind::Doubling) {
        return x < 0.5 ? 2.0 * x : 2.0 * x - 1.0;
    }
    if (x < 0.5) {
        // x (1 + 2^g x^g); tends to 1 as x -> 1/2 from below
        return x * (1.0 + std::pow(2.0 * x, gamma_));
    }
    return 2.0 * x - 1.0;
}

std::vector<double> OrbitSampler::sample(std::size_t length) const {
    std::vector<double> orbit;
    orbit.reserve(length);
    visit(length, [&](double x) { orbit.push_back(x); });
    return orbit;
}

InducedMap::InducedMap(MapSystem base, long max_return)
    : base_(base), max_return_(max_return) {
    if (base.kind() != MapKind::Lsv)
        throw std::invalid_argument("induced map is defined for the LSV base");
    if (max_return < 1) throw std::invalid_argument("max_return must be >= 1");
}

long InducedMap::return_time(double y) const {
    return apply(y).tau;
}

InducedMap::Step InducedMap::apply(double y) const {
    if (!(y > 0.5 && y <= 1.0))
        throw std::invalid_argument("induced map argument outside (1/2, 1]");
    double x = y;
    for (long n = 1; n <= max_return_; ++n) {
        x = base_.step(x);
        if (x > 0.5) return Step{x, n};
    }
    throw ReturnOverflow("no return to (1/2,1] within " + std::to_string(max_return_) +
                         " iterates from y=" + std::to_string(y));
}

}  // namespace ratelab
