#include <doctest.h>

#include <cmath>
#include <vector>

#include "ratelab/dynsys.hpp"
#include "ratelab/errors.hpp"
#include "ratelab/ratelab.hpp"

using namespace ratelab;

TEST_CASE("map step branch formulas") {
    const MapSystem doubling = MapSystem::doubling();
    CHECK(doubling.step(0.3) == doctest::Approx(0.6).epsilon(1e-15));

    const MapSystem lsv = MapSystem::lsv(0.5);
    // 0.25 (1 + sqrt(2) * 0.5)
    CHECK(lsv.step(0.25) ==
          doctest::Approx(0.25 * (1.0 + std::sqrt(2.0) * 0.5)).epsilon(1e-14));

    for (double g : {0.1, 0.25, 0.4, 0.5})
        CHECK(MapSystem::lsv(g).step(0.75) == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS_AS((void)doubling.step(1.2), std::invalid_argument);
    CHECK_THROWS_AS((void)doubling.step(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(MapSystem::lsv(0.0), std::invalid_argument);
    CHECK_THROWS_AS(MapSystem::lsv(1.0), std::invalid_argument);
}

TEST_CASE("lsv with tiny gamma approaches the doubling branches") {
    const MapSystem nearly = MapSystem::lsv(1e-12);
    const MapSystem doubling = MapSystem::doubling();
    for (double x : {0.1, 0.3, 0.49, 0.5, 0.75, 1.0})
        CHECK(nearly.step(x) == doctest::Approx(doubling.step(x)).epsilon(1e-9));
}

TEST_CASE("lsv lower branch is continuous at 1/2 with limit 1") {
    const double eps = 1e-6;
    for (double g : {0.1, 0.25, 0.4, 0.75}) {
        const MapSystem lsv = MapSystem::lsv(g);
        CHECK(std::fabs(lsv.step(0.5 - eps) - 1.0) < 3.0 * eps);
    }
}

TEST_CASE("orbit sampling is deterministic per seed") {
    for (const MapSystem& sys : {MapSystem::doubling(), MapSystem::lsv(0.25)}) {
        OrbitSampler a(sys, 12345u);
        OrbitSampler b(sys, 12345u);
        CHECK(a.sample(10) == b.sample(10));
        OrbitSampler c(sys, 54321u);
        CHECK(a.sample(10) != c.sample(10));
    }
}

TEST_CASE("doubling long-orbit empirical mean is 1/2") {
    OrbitSampler sampler(MapSystem::doubling(), 777u);
    double sum = 0.0;
    const std::size_t n = 1000000;
    sampler.visit(n, [&](double x) { sum += x; });
    CHECK(std::fabs(sum / static_cast<double>(n) - 0.5) < 0.005);
}

TEST_CASE("doubling symbolic orbit tracks the map to one ulp") {
    OrbitSampler sampler(MapSystem::doubling(), 99u);
    const std::vector<double> orbit = sampler.sample(200);
    const MapSystem doubling = MapSystem::doubling();
    for (std::size_t j = 0; j + 1 < orbit.size(); ++j)
        CHECK(std::fabs(doubling.step(orbit[j]) - orbit[j + 1]) <= 0x1.0p-53);
}

TEST_CASE("lsv invariant mass piles up near the neutral fixed point") {
    OrbitSampler sampler(MapSystem::lsv(0.25), 2024u);
    const std::size_t n = 1000000;
    std::size_t hits = 0;
    sampler.visit(n, [&](double x) {
        if (x <= 0.1) ++hits;
    });
    CHECK(static_cast<double>(hits) / static_cast<double>(n) > 0.1);
}

TEST_CASE("return time basics") {
    const InducedMap induced(MapSystem::lsv(0.25));
    // T(0.9) = 0.8 stays in (1/2, 1]
    CHECK(induced.return_time(0.9) == 1);
    // T(0.7) = 0.4 leaves the section
    CHECK(induced.return_time(0.7) >= 2);
    CHECK_THROWS_AS((void)induced.return_time(0.5), std::invalid_argument);
    CHECK_THROWS_AS((void)induced.return_time(0.2), std::invalid_argument);
}

TEST_CASE("return overflow is a data error") {
    const InducedMap tight(MapSystem::lsv(0.25), 3);
    // just above 1/2: the excursion from T(y) ~ 0 takes far more than 3 steps
    CHECK_THROWS_AS((void)tight.return_time(0.5 + 1e-9), ReturnOverflow);
}

TEST_CASE("induced map composes the base map tau times and stays out of Y") {
    const MapSystem base = MapSystem::lsv(0.25);
    const InducedMap induced(base);
    SplitMix64 rng(5150u);
    for (int trial = 0; trial < 10000; ++trial) {
        const double y = 0.5 + 0.5 * rng.next_uniform() + 1e-12;
        const InducedMap::Step step = induced.apply(y);
        double x = y;
        for (long j = 1; j < step.tau; ++j) {
            x = base.step(x);
            CHECK(x <= 0.5);
        }
        x = base.step(x);
        CHECK(x > 0.5);
        CHECK(x == step.image);
    }
}

TEST_CASE("return-time tail decays like n^{-1/gamma}") {
    // gamma = 1/4: survival freq(tau > n) falls with log-log slope near -4,
    // +-0.5 on the fit. The tail is (c1 n + c0)^{-4}, so small n is
    // preasymptotic; fit where n * gamma 2^gamma dominates c0 ~ 1.2.
    const InducedMap induced(MapSystem::lsv(0.25));
    double y = 0.8;
    for (int i = 0; i < 100; ++i) y = induced.apply(y).image;

    const long max_tracked = 128;
    std::vector<double> survival(static_cast<std::size_t>(max_tracked) + 1, 0.0);
    const long returns = 10000000;
    for (long i = 0; i < returns; ++i) {
        const InducedMap::Step step = induced.apply(y);
        y = step.image;
        for (long n = 1; n <= std::min(step.tau - 1, max_tracked); ++n)
            survival[static_cast<std::size_t>(n)] += 1.0;
    }
    std::vector<std::pair<double, double>> points;
    for (long n : {32, 48, 64, 80, 100})
        points.emplace_back(static_cast<double>(n),
                            survival[static_cast<std::size_t>(n)] /
                                static_cast<double>(returns));
    const FitResult fit = fit_loglog(points);
    CHECK(fit.slope > -4.5);
    CHECK(fit.slope < -3.5);
}
