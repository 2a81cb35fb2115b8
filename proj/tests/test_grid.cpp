#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dynlab/families.hpp"
#include "dynlab/grid.hpp"

using namespace dynlab;

TEST_CASE("dens basics") {
    GridSet X(0.0, 1.0 / 64, 64);
    Interval I(0.25, 0.5);
    SUBCASE("covering set") {
        for (std::size_t i = 0; i < 64; ++i) X.set(i);
        CHECK(dens(X, I) == doctest::Approx(1.0));
    }
    SUBCASE("disjoint set") {
        X.set_interval(Interval(0.75, 1.0));
        CHECK(dens(X, I) == 0.0);
    }
    SUBCASE("left half of I") {
        X.set_interval(Interval(0.25, 0.375));
        CHECK(dens(X, I) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("degenerate I throws") {
        Interval d; d.lo = d.hi = 0.3;
        CHECK_THROWS_AS(dens(X, d), std::invalid_argument);
    }
}

TEST_CASE("dens handles partial end cells exactly") {
    GridSet X(0.0, 0.125, 8);
    X.set(2); // [0.25, 0.375]
    Interval I(0.3, 0.7);
    CHECK(dens(X, I) == doctest::Approx(0.075 / 0.4).epsilon(1e-12));
}

TEST_CASE("one-sided density from an endpoint") {
    const std::size_t N = 32;
    GridSet X(0.0, 1.0 / N, N);
    Interval I(0.0, 1.0);
    SUBCASE("X equals I") {
        for (std::size_t i = 0; i < N; ++i) X.set(i);
        CHECK(dens_from(X, 0.0, I) == doctest::Approx(1.0));
        CHECK(dens_from(X, 1.0, I) == doctest::Approx(1.0));
    }
    SUBCASE("dense near a beats the average") {
        X.set_interval(Interval(0.0, 0.25));
        double d = dens(X, I);
        double D = dens_from(X, 0.0, I);
        CHECK(D > d);
        CHECK(D == doctest::Approx(1.0));
    }
    SUBCASE("missing only the cell adjacent to a") {
        for (std::size_t i = 1; i < N; ++i) X.set(i);
        // prefix of k cells has density (k-1)/k, maximized at k = N
        CHECK(dens_from(X, 0.0, I) == doctest::Approx(double(N - 1) / N).epsilon(1e-12));
    }
}

TEST_CASE("dens <= dens_from for either endpoint") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GridSet X(0.0, 1.0 / 256, 256);
    for (int i = 0; i < 80; ++i) X.set_point(u(rng));
    for (int k = 0; k < 200; ++k) {
        double a = u(rng), b = u(rng);
        Interval I(a, b);
        if (I.length() < 0.05) continue;
        double d = dens(X, I);
        CHECK(d <= dens_from(X, I.lo, I) + 1e-12);
        CHECK(d <= dens_from(X, I.hi, I) + 1e-12);
    }
}

TEST_CASE("refinement changes measure within the boundary budget") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Interval> pieces;
        for (int i = 0; i < 10; ++i) {
            double a = u(rng);
            pieces.emplace_back(a, std::min(1.0, a + 0.08 * u(rng)));
        }
        double h = 1.0 / 512;
        GridSet coarse(0.0, h, 512), fine(0.0, h / 2, 1024);
        for (const auto& p : pieces) { coarse.set_interval(p); fine.set_interval(p); }
        double budget = 2.0 * double(coarse.runs().size()) * h;
        CHECK(std::abs(coarse.lambda() - fine.lambda()) <= budget + 1e-12);
    }
}

TEST_CASE("invariant_hull") {
    MapSpec m = make_logistic(4.0);
    double h = 1.0 / 4096;
    SUBCASE("steps = 0 leaves the seed unchanged") {
        GridSet seed = GridSet::over(m, h);
        seed.set_point(0.75);
        GridSet out = invariant_hull(m, seed, 0);
        CHECK(out == seed);
    }
    SUBCASE("fixed-point seed gains its preimages") {
        GridSet seed = GridSet::over(m, h);
        seed.set_point(0.75);
        GridSet out = invariant_hull(m, seed, 1);
        CHECK(out.test_point(0.75));
        CHECK(out.test_point(0.25)); // the other preimage of 0.75
    }
    SUBCASE("basin seed of the 2-cycle fills almost everything") {
        MapSpec m32 = make_logistic(3.2);
        GridSet seed = GridSet::over(m32, h);
        seed.set_interval(Interval(0.5, 0.52));
        GridSet out = invariant_hull(m32, seed, 40);
        CHECK(out.lambda() >= 0.99);
    }
}

TEST_CASE("runs and hashes") {
    GridSet X(0.0, 0.25, 4);
    X.set(0); X.set(1); X.set(3);
    auto r = X.runs();
    REQUIRE(r.size() == 2);
    CHECK(r[0] == std::pair<std::size_t, std::size_t>{0, 1});
    CHECK(r[1] == std::pair<std::size_t, std::size_t>{3, 3});
    GridSet Y = X;
    CHECK(X.hash() == Y.hash());
    Y.set(2);
    CHECK(X.hash() != Y.hash());
    CHECK(X.jaccard(Y) == doctest::Approx(0.75));
}
