#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ratelab/errors.hpp"
#include "ratelab/oracles.hpp"
#include "ratelab/otmetrics.hpp"

using namespace ratelab;

namespace {

EmpiricalPathMeasure random_measure(SplitMix64& rng, int M, int d, int dim,
                                    double scale = 0.3) {
    std::vector<PiecewisePath> paths;
    for (int p = 0; p < M; ++p) {
        std::vector<double> times(static_cast<std::size_t>(d) + 1);
        for (int i = 0; i <= d; ++i)
            times[static_cast<std::size_t>(i)] = static_cast<double>(i) / d;
        std::vector<double> inc(static_cast<std::size_t>(d) * dim);
        for (double& x : inc) x = rng.next_gaussian() * scale;
        paths.push_back(PiecewisePath::from_increments(
            times, std::vector<double>(static_cast<std::size_t>(dim), 0.0), inc, dim));
    }
    return EmpiricalPathMeasure(std::move(paths));
}

EmpiricalPathMeasure scaled(const EmpiricalPathMeasure& mu, double lambda) {
    std::vector<PiecewisePath> paths;
    for (const auto& p : mu.paths) {
        std::vector<double> inc = p.increments();
        for (double& x : inc) x *= lambda;
        std::vector<double> start = p.start_value();
        for (double& x : start) x *= lambda;
        paths.push_back(
            PiecewisePath::from_increments(p.times(), start, inc, p.dim()));
    }
    return EmpiricalPathMeasure(std::move(paths));
}

}  // namespace

TEST_CASE("wasserstein1 basics") {
    SplitMix64 rng(101u);
    const EmpiricalPathMeasure mu = random_measure(rng, 8, 4, 1);

    SUBCASE("identical measures, also after a permutation") {
        CHECK(wasserstein1(mu, mu) == 0.0);
        std::vector<PiecewisePath> shuffled(mu.paths.rbegin(), mu.paths.rend());
        CHECK(wasserstein1(mu, EmpiricalPathMeasure(shuffled)) == 0.0);
    }

    SUBCASE("single atom reduces to the sup distance") {
        EmpiricalPathMeasure a({mu.paths[0]});
        EmpiricalPathMeasure b({mu.paths[1]});
        CHECK(wasserstein1(a, b) ==
              doctest::Approx(sup_distance(mu.paths[0], mu.paths[1])).epsilon(1e-15));
    }

    SUBCASE("atom-count mismatch") {
        EmpiricalPathMeasure small({mu.paths[0], mu.paths[1]});
        CHECK_THROWS_AS((void)wasserstein1(mu, small), SizeMismatch);
    }
}

TEST_CASE("assignment solver equals the factorial oracle") {
    SplitMix64 rng(202u);
    for (int trial = 0; trial < 200; ++trial) {
        const int M = 2 + static_cast<int>(rng.next_u64() % 5);  // M <= 6
        const EmpiricalPathMeasure mu = random_measure(rng, M, 4, 1);
        const EmpiricalPathMeasure nu = random_measure(rng, M, 4, 1);
        const CostMatrix cost = CostMatrix::between(mu, nu);
        CHECK(std::fabs(wasserstein1(cost) - w1_bruteforce(cost)) <= 1e-10);
    }
}

TEST_CASE("prokhorov basics") {
    SUBCASE("identical measures") {
        SplitMix64 rng(303u);
        const EmpiricalPathMeasure mu = random_measure(rng, 6, 4, 1);
        CHECK(prokhorov(mu, mu) == 0.0);
    }

    SUBCASE("hand-computed 2x2 instance") {
        const CostMatrix cost = CostMatrix::from_rows(2, {0.3, 1.0, 1.0, 0.3});
        CHECK(prokhorov(cost) == 0.3);
    }

    SUBCASE("deficient matchings settle on a k/M candidate") {
        // one zero-cost pair; the second atom is cheaper to give up (mass
        // 1/2) than to transport at 0.9
        const CostMatrix cost = CostMatrix::from_rows(2, {0.0, 0.9, 0.9, 0.9});
        CHECK(prokhorov(cost) == 0.5);
    }

    SUBCASE("all-far atoms transport at their common cost") {
        const CostMatrix cost = CostMatrix::from_rows(2, {0.9, 0.9, 0.9, 0.9});
        CHECK(prokhorov(cost) == 0.9);
    }
}

TEST_CASE("prokhorov equals the subset-condition oracle") {
    SplitMix64 rng(404u);
    for (int trial = 0; trial < 200; ++trial) {
        const int M = 2 + static_cast<int>(rng.next_u64() % 9);  // M <= 10
        const EmpiricalPathMeasure mu = random_measure(rng, M, 4, 1);
        const EmpiricalPathMeasure nu = random_measure(rng, M, 4, 1);
        const CostMatrix cost = CostMatrix::between(mu, nu);
        CHECK(prokhorov(cost) == prokhorov_bruteforce(cost));
    }
}

TEST_CASE("prokhorov is invariant under atom reordering") {
    SplitMix64 rng(505u);
    const EmpiricalPathMeasure mu = random_measure(rng, 12, 4, 1);
    const EmpiricalPathMeasure nu = random_measure(rng, 12, 4, 1);
    std::vector<PiecewisePath> perm(mu.paths.rbegin(), mu.paths.rend());
    CHECK(prokhorov(mu, nu) == prokhorov(EmpiricalPathMeasure(perm), nu));
}

TEST_CASE("scaling behaviour") {
    SplitMix64 rng(606u);
    const EmpiricalPathMeasure mu = random_measure(rng, 10, 4, 1);
    const EmpiricalPathMeasure nu = random_measure(rng, 10, 4, 1);
    const double lambda = 2.5;
    const double w1 = wasserstein1(mu, nu);
    const double w1s = wasserstein1(scaled(mu, lambda), scaled(nu, lambda));
    CHECK(w1s == doctest::Approx(lambda * w1).epsilon(1e-12));
    const double pi = prokhorov(mu, nu);
    const double pis = prokhorov(scaled(mu, lambda), scaled(nu, lambda));
    CHECK(pis >= pi - 1e-15);
}

TEST_CASE("wasserstein1 satisfies the triangle inequality") {
    SplitMix64 rng(707u);
    for (int trial = 0; trial < 30; ++trial) {
        const EmpiricalPathMeasure a = random_measure(rng, 8, 4, 1);
        const EmpiricalPathMeasure b = random_measure(rng, 8, 4, 1);
        const EmpiricalPathMeasure c = random_measure(rng, 8, 4, 1);
        CHECK(wasserstein1(a, c) <= wasserstein1(a, b) + wasserstein1(b, c) + 1e-10);
    }
}

TEST_CASE("prokhorov and the reversal operator obey the Lipschitz bound") {
    // h has Lipschitz constant 2 and is an involution on pinned paths, so
    // Pi(mu, nu) <= 2 Pi(h mu, h nu) and vice versa
    SplitMix64 rng(909u);
    for (int trial = 0; trial < 20; ++trial) {
        const EmpiricalPathMeasure mu = random_measure(rng, 16, 8, 1);
        const EmpiricalPathMeasure nu = random_measure(rng, 16, 8, 1);
        auto reversed = [](const EmpiricalPathMeasure& m) {
            std::vector<PiecewisePath> paths;
            for (const auto& p : m.paths) paths.push_back(h_reversal(p));
            return EmpiricalPathMeasure(std::move(paths));
        };
        const double direct = prokhorov(mu, nu);
        const double flipped = prokhorov(reversed(mu), reversed(nu));
        CHECK(direct <= 2.0 * flipped + 1e-12);
        CHECK(flipped <= 2.0 * direct + 1e-12);
    }
}

TEST_CASE("metric inequalities") {
    SplitMix64 rng(808u);

    SUBCASE("identical measures give zeros") {
        const EmpiricalPathMeasure mu = random_measure(rng, 8, 4, 1);
        const InequalityReport rep = check_inequalities(mu, mu);
        CHECK(rep.w1 == 0.0);
        CHECK(rep.pi == 0.0);
    }

    SUBCASE("random pairs: Pi <= sqrt(W1) and the index-coupling bound") {
        for (int trial = 0; trial < 25; ++trial) {
            const EmpiricalPathMeasure mu = random_measure(rng, 50, 4, 1);
            const EmpiricalPathMeasure nu = random_measure(rng, 50, 4, 1);
            double coupling_sup = 0.0;
            for (std::size_t i = 0; i < mu.size(); ++i)
                coupling_sup =
                    std::max(coupling_sup, sup_distance(mu.paths[i], nu.paths[i]));
            const InequalityReport rep = check_inequalities(mu, nu, coupling_sup);
            CHECK(rep.pi <= rep.sqrt_w1 + 1e-12);
            CHECK(rep.pi <= coupling_sup + 1e-12);
        }
    }

    SUBCASE("violations are reported as solver bugs") {
        const EmpiricalPathMeasure mu = random_measure(rng, 8, 4, 1);
        const EmpiricalPathMeasure nu = random_measure(rng, 8, 4, 1);
        // a fake coupling bound of zero cannot dominate a positive Prokhorov
        CHECK_THROWS_AS((void)check_inequalities(mu, nu, 0.0), InequalityViolation);
    }
}
