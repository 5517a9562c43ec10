#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "ratelab/decomp.hpp"
#include "ratelab/errors.hpp"
#include "ratelab/ratelab.hpp"

using namespace ratelab;

namespace {
constexpr double kPi = 3.14159265358979323846;

double cos2pi(double x, int k = 1) { return std::cos(2.0 * kPi * k * x); }
}  // namespace

TEST_CASE("doubling transfer operator on trig polynomials") {
    const TransferOperator op = TransferOperator::exact_doubling();

    const Func one(TrigPoly(1.0));
    const Func p_one = op.apply(one);
    CHECK(p_one.trig().constant_term() == 1.0);
    CHECK(p_one.trig().terms().empty());

    // odd frequencies die
    const Func killed = op.apply(Func(TrigPoly::cosine(1)));
    CHECK(killed.trig().is_zero());

    // even frequencies halve
    const Func halved = op.apply(Func(TrigPoly::cosine(2)));
    REQUIRE(halved.trig().terms().size() == 1);
    CHECK(halved.trig().terms()[0].k == 1);
    CHECK(halved.trig().terms()[0].a == 1.0);
}

TEST_CASE("doubling transfer operator on grid tables") {
    const TransferOperator op = TransferOperator::exact_doubling();
    const Func v(GridTable::sampled(0.0, 1.0, 1024, [](double x) { return cos2pi(x, 2); }));

    // P1 = 1 exactly (midpoint interpolation of a constant)
    const Func p1 = op.apply(Func(GridTable::sampled(0.0, 1.0, 512, [](double) {
        return 1.0;
    })));
    for (double x : {0.0, 0.31, 0.77, 1.0}) CHECK(p1(x) == doctest::Approx(1.0).epsilon(1e-14));

    // mean contraction via duality with w = 1
    CHECK(std::fabs(op.integrate(op.apply(v)) - op.integrate(v)) < 1e-10);

    // frequencies halve, up to interpolation error
    const Func pv = op.apply(v);
    for (double x : {0.1, 0.4, 0.83})
        CHECK(pv(x) == doctest::Approx(cos2pi(x)).epsilon(1e-5));
}

TEST_CASE("primary decomposition oracles on the doubling map") {
    const TransferOperator op = TransferOperator::exact_doubling();

    SUBCASE("v = cos(2 pi x): already a martingale") {
        const Decomposition d = primary_decomposition(op, {Func(TrigPoly::cosine(1))});
        CHECK(d.truncation_K == 0);
        CHECK(d.residual == 0.0);
        CHECK(op.sup_norm(d.chi[0]) == 0.0);
        for (double x : {0.11, 0.63}) CHECK(d.m[0](x) == doctest::Approx(cos2pi(x)));
        CHECK(d.sigma(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("v = cos(4 pi x): one coboundary step") {
        const Decomposition d = primary_decomposition(op, {Func(TrigPoly::cosine(2))});
        REQUIRE(d.chi[0].trig().terms().size() == 1);
        CHECK(d.chi[0].trig().terms()[0].k == 1);
        CHECK(d.chi[0].trig().terms()[0].a == doctest::Approx(1.0));
        REQUIRE(d.m[0].trig().terms().size() == 1);
        CHECK(d.m[0].trig().terms()[0].k == 1);
        CHECK(d.m[0].trig().terms()[0].a == doctest::Approx(1.0));
        CHECK(d.residual < 1e-10);
        CHECK(d.sigma(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
    }

    SUBCASE("v = 0") {
        const Decomposition d = primary_decomposition(op, {Func(TrigPoly(0.0))});
        CHECK(op.sup_norm(d.m[0]) == 0.0);
        CHECK(op.sup_norm(d.chi[0]) == 0.0);
        CHECK(d.sigma(0, 0) == 0.0);
    }

    SUBCASE("mean-zero precondition") {
        CHECK_THROWS_AS(
            primary_decomposition(op, {Func(TrigPoly(0.5, {TrigPoly::Term{2, 1.0, 0.0}}))}),
            std::invalid_argument);
    }

    SUBCASE("a sub-tolerance constant never decays") {
        // mean 5e-9 passes the 1e-8 precondition but P^k v stalls at 5e-9
        const Func v(TrigPoly(5e-9, {TrigPoly::Term{2, 1.0, 0.0}}));
        CHECK_THROWS_AS(primary_decomposition(op, {v}, 1e-10), NoDecay);
    }
}

TEST_CASE("decomposition identity holds on a 2048-point grid") {
    const TransferOperator op = TransferOperator::exact_doubling();
    const TrigPoly v(0.0, {TrigPoly::Term{2, 1.0, 0.0}, TrigPoly::Term{4, 0.5, -0.25},
                           TrigPoly::Term{3, 0.0, 0.75}});
    const Decomposition d = primary_decomposition(op, {Func(v)});
    CHECK(d.residual < 1e-10);
    const MapSystem doubling = MapSystem::doubling();
    double worst = 0.0;
    for (int i = 0; i < 2048; ++i) {
        const double x = static_cast<double>(i) / 2048.0;
        const double lhs = v(x);
        const double rhs = d.m[0](x) + d.chi[0](doubling.step(x)) - d.chi[0](x);
        worst = std::max(worst, std::fabs(lhs - rhs));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("secondary decomposition") {
    const TransferOperator op = TransferOperator::exact_doubling();

    SUBCASE("m = cos(2 pi x) gives (1/2) cos(4 pi x)") {
        const Decomposition d = primary_decomposition(op, {Func(TrigPoly::cosine(2))});
        const std::vector<Func> phi = secondary_decomposition(op, d);
        REQUIRE(phi.size() == 1);
        for (double x : {0.0, 0.2, 0.55, 0.81})
            CHECK(phi[0](x) == doctest::Approx(0.5 * cos2pi(x, 2)).epsilon(1e-12));
        CHECK(std::fabs(op.integrate(phi[0])) < 1e-8);
    }

    SUBCASE("constant martingale part gives zero") {
        Decomposition d;
        d.m = {Func(TrigPoly(0.7))};
        d.chi = {Func(TrigPoly(0.0))};
        d.sigma = Matrix(1);
        d.sigma(0, 0) = 0.49;
        const std::vector<Func> phi = secondary_decomposition(op, d);
        for (double x : {0.1, 0.5, 0.9}) CHECK(std::fabs(phi[0](x)) < 1e-15);
    }
}

TEST_CASE("green-kubo estimates match the decomposition variance") {
    const MapObservable v2 = MapObservable::scalar([](double x) { return cos2pi(x, 1); });
    const MapObservable v4 = MapObservable::scalar([](double x) { return cos2pi(x, 2); });
    OrbitSampler sampler(MapSystem::doubling(), 1001u);

    const Matrix s2 = green_kubo_sigma(sampler, v2, 30, 1000000);
    CHECK(std::fabs(s2(0, 0) - 0.5) < 0.01);

    OrbitSampler sampler2(MapSystem::doubling(), 1002u);
    const Matrix s4 = green_kubo_sigma(sampler2, v4, 30, 1000000);
    CHECK(std::fabs(s4(0, 0) - 0.5) < 0.01);

    const MapObservable zero = MapObservable::scalar([](double) { return 0.0; });
    OrbitSampler sampler3(MapSystem::doubling(), 1003u);
    const Matrix s0 = green_kubo_sigma(sampler3, zero, 10, 10000);
    CHECK(s0(0, 0) == 0.0);
}

TEST_CASE("martingale orthogonality along orbits") {
    // E[(m o T^k)(m o T^l)] ~ 0 for k != l, with m = cos(2 pi x)
    const MapSystem doubling = MapSystem::doubling();
    const int samples = 100000;
    double acc = 0.0;
    OrbitSampler sampler(MapSystem::doubling(), 515151u);
    sampler.visit(static_cast<std::size_t>(samples), [&](double x0) {
        const double a = cos2pi(x0);
        const double b = cos2pi(doubling.step(x0));
        acc += a * b;
    });
    CHECK(std::fabs(acc / samples) < 0.01);
}

TEST_CASE("azuma-hoeffding tail for the maximal martingale sum") {
    // two-sided maximal bound 2 exp(-x^2 / (2 n |m|_inf^2)) for the bounded
    // martingale differences m o T^j, m = cos(2 pi x)
    const std::size_t n = 1024;
    const int samples = 2000;
    const double slack = 2.0 / std::sqrt(static_cast<double>(samples));
    std::vector<double> maxima(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        OrbitSampler sampler(MapSystem::doubling(), derive_seed(1717u, s));
        double sum = 0.0, mx = 0.0;
        sampler.visit(n, [&](double x) {
            sum += cos2pi(x);
            mx = std::max(mx, std::fabs(sum));
        });
        maxima[static_cast<std::size_t>(s)] = mx;
    }
    for (double x : {8.0, 16.0, 24.0, 32.0, 48.0, 64.0}) {
        int count = 0;
        for (double v : maxima)
            if (v >= x) ++count;
        const double freq = static_cast<double>(count) / samples;
        const double bound = std::min(1.0, 2.0 * std::exp(-x * x / (2.0 * n)));
        CHECK(freq <= bound + slack);
    }
}

TEST_CASE("variance process deviation decays like sqrt(log n / n)") {
    // max_k |V_n(k) - (k/n) sigma^2| = n^{-1} max_k |Phi_n - Phi_{n-k}|
    // with Phi = (1/2) cos(4 pi x) along doubling orbits; median over seeds
    // should fit a log-log slope in [-0.7, -0.3]
    std::vector<std::pair<double, double>> points;
    for (int e = 7; e <= 13; ++e) {
        const std::size_t n = std::size_t{1} << e;
        std::vector<double> deviations;
        for (int seed = 0; seed < 64; ++seed) {
            OrbitSampler sampler(MapSystem::doubling(),
                                 derive_seed(888u, static_cast<std::uint64_t>(seed), n));
            double run = 0.0;
            double max_dev = 0.0;
            double final_sum = 0.0;
            std::vector<double> prefix;
            prefix.reserve(n + 1);
            prefix.push_back(0.0);
            sampler.visit(n, [&](double x) {
                run += 0.5 * cos2pi(x, 2);
                prefix.push_back(run);
            });
            final_sum = run;
            for (double p : prefix)
                max_dev = std::max(max_dev, std::fabs(final_sum - p));
            deviations.push_back(max_dev / static_cast<double>(n));
        }
        std::sort(deviations.begin(), deviations.end());
        points.emplace_back(static_cast<double>(n), deviations[deviations.size() / 2]);
    }
    const FitResult fit = fit_loglog(points);
    CHECK(fit.slope > -0.7);
    CHECK(fit.slope < -0.3);
}

TEST_CASE("induced-map transfer operator on the grid") {
    const InducedMap induced(MapSystem::lsv(0.25));
    const TransferOperator op = TransferOperator::grid_gibbs_markov(induced, 1024);
    CHECK(op.branch_count() > 10);

    // P 1 = 1 to grid tolerance
    const Func one(TrigPoly(1.0));
    const Func p1 = op.apply(one);
    for (double y : {0.51, 0.6, 0.75, 0.99})
        CHECK(p1(y) == doctest::Approx(1.0).epsilon(1e-6));

    // mean contraction to grid tolerance
    const Func v(GridTable::sampled(0.5, 1.0, 1024, [](double y) { return cos2pi(y); }));
    CHECK(std::fabs(op.integrate(op.apply(v)) - op.integrate(v)) < 1e-5);

    // decomposition of a centered observable: residual at grid scale and a
    // positive variance
    const Func centered = op.centered(v);
    const Decomposition d = primary_decomposition(op, {centered}, 1e-9);
    CHECK(d.residual < 1e-5);
    CHECK(d.sigma(0, 0) > 0.0);
    CHECK(d.truncation_K >= 1);

    // duality along an orbit: E[(Pv) w] = E[v (w o F)] under the invariant
    // measure; pointwise composition avoids the unresolvable grid table of
    // w o F (thin branches sweep the full range of w below the cell size)
    const Func pv = op.apply(centered);
    const auto w = [](double y) { return std::sin(2.0 * kPi * y); };
    double lhs = 0.0, rhs = 0.0;
    double y = 0.8;
    const int steps = 300000;
    for (int t = 0; t < steps; ++t) {
        const double fy = induced.apply(y).image;
        lhs += pv(y) * w(y);
        rhs += centered(y) * w(fy);
        y = fy;
    }
    CHECK(std::fabs(lhs - rhs) / steps < 3e-3);
}

TEST_CASE("flow decomposition on the doubling testbed") {
    const SuspensionFlow flow(MapSystem::doubling(), RoofFunction::affine(1.0, 0.5));
    const FlowObservable v = FlowObservable::scalar(
        [](double x, double) { return cos2pi(x); }, true, true);
    const FlowDecomposition dec(flow, v, 4096);

    CHECK(dec.roof_mean() == doctest::Approx(1.25));
    CHECK(dec.induced().residual < 1e-8);
    CHECK(dec.sigma()(0, 0) == doctest::Approx(dec.induced().sigma(0, 0) / 1.25));
    CHECK(dec.sigma()(0, 0) > 0.0);

    // psi = m + chi o F_1 - chi pointwise
    SplitMix64 rng(31u);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const double y = rng.next_uniform();
        const double u = rng.next_uniform() * flow.roof()(y) * 0.999;
        double psi = 0.0, m = 0.0, chi = 0.0, chi_next = 0.0;
        dec.eval_psi(y, u, &psi);
        dec.eval_m(y, u, &m);
        dec.eval_chi(y, u, &chi);
        const auto next = flow.flow_point(y, u, 1.0);
        dec.eval_chi(next.x, next.u, &chi_next);
        worst = std::max(worst, std::fabs(psi - (m + chi_next - chi)));
    }
    CHECK(worst < 1e-5);

    // m is in the kernel of the unit-time transfer operator
    double worst_kernel = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const double y = rng.next_uniform();
        const double u = rng.next_uniform() * flow.roof()(y) * 0.999;
        double out = 0.0;
        dec.eval_transfer_m(y, u, &out);
        worst_kernel = std::max(worst_kernel, std::fabs(out));
    }
    CHECK(worst_kernel < 1e-6);
}

TEST_CASE("decomposition serialization carries the full numeric payload") {
    const TransferOperator op = TransferOperator::exact_doubling();
    const Decomposition d = primary_decomposition(op, {Func(TrigPoly::cosine(2))});
    const auto j = d.to_json();
    CHECK(j.at("dim").get<int>() == 1);
    CHECK(j.at("sigma")[0][0].get<double>() == doctest::Approx(0.5));
    CHECK(j.at("residual").get<double>() < 1e-10);
    CHECK(j.at("truncation_K").get<int>() == 1);
    CHECK(j.at("m")[0].at("rep").get<std::string>() == "trig");
}
