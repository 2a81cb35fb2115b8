#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dynlab/branches.hpp"
#include "dynlab/families.hpp"

using namespace dynlab;

namespace {

// Dense-sampling oracle for interval images.
Interval image_oracle(const MapSpec& m, const Interval& J, int samples = 20000) {
    double lo = kInf, hi = -kInf;
    for (int i = 0; i <= samples; ++i) {
        double x = J.lo + (J.hi - J.lo) * i / samples;
        double v = m.eval(x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Interval r; r.lo = lo; r.hi = hi; return r;
}

} // namespace

TEST_CASE("exact image agrees with dense-sampling oracle") {
    std::mt19937_64 rng(3);
    for (const MapSpec& m : {make_logistic(4.0), make_logistic(3.2), make_cubic(3.8)}) {
        Interval h = m.hull();
        std::uniform_real_distribution<double> u(h.lo, h.hi);
        for (int k = 0; k < 200; ++k) {
            double a = u(rng), b = u(rng);
            Interval J(a, b);
            if (J.length() < 1e-6) continue;
            Interval img = image(m, J);
            Interval orc = image_oracle(m, J);
            CHECK(img.lo == doctest::Approx(orc.lo).epsilon(1e-7));
            CHECK(img.hi == doctest::Approx(orc.hi).epsilon(1e-7));
            // sampled range never exceeds the exact image (up to roundoff)
            CHECK(img.lo <= orc.lo + 1e-12);
            CHECK(orc.hi <= img.hi + 1e-12);
        }
    }
}

TEST_CASE("image of the critical interval") {
    MapSpec m = make_logistic(4.0);
    Interval img = image(m, Interval(0.4, 0.6));
    CHECK(img.lo == doctest::Approx(0.96).epsilon(1e-14));
    CHECK(img.hi == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("min_image_length") {
    MapSpec m4 = make_logistic(4.0);
    SUBCASE("degenerate interval stays at zero") {
        Interval fp; fp.lo = 0.0; fp.hi = 0.0;
        CHECK(min_image_length(m4, fp, 20) == 0.0);
    }
    SUBCASE("critical interval on the Ulam map stays positive") {
        // oracle: iterate exact images and take the running minimum
        Interval J(0.4, 0.6);
        double expect = kInf;
        Interval cur = J;
        for (int k = 1; k <= 50; ++k) {
            cur = image(m4, cur);
            expect = std::min(expect, cur.length());
        }
        double got = min_image_length(m4, J, 50);
        CHECK(got == doctest::Approx(expect).epsilon(1e-14));
        CHECK(got > 0.0);
        // first image [0.96, 1] is the minimum here
        CHECK(got == doctest::Approx(0.04).epsilon(1e-12));
    }
    SUBCASE("images decay inside an attracting basin") {
        MapSpec m = make_logistic(3.2);
        Interval J(0.30, 0.31); // inside the basin, away from the 2-cycle
        double early = min_image_length(m, J, 5);
        double late = min_image_length(m, J, 400);
        CHECK(late < early);
        CHECK(late < 1e-8);
    }
}

TEST_CASE("branch_of partitions at extrema") {
    MapSpec m = make_logistic(4.0);
    CHECK(branch_of(m, 0.3) == Interval(0.0, 0.5));
    CHECK(branch_of(m, 0.7) == Interval(0.5, 1.0));
    CHECK(branch_of(m, 0.5) == Interval(0.5, 1.0));
    MapSpec c = make_cubic(4.0);
    double xs = std::sqrt(0.25);
    CHECK(branch_of(c, 0.0).lo == doctest::Approx(-xs));
    CHECK(branch_of(c, 0.0).hi == doctest::Approx(xs));
}

TEST_CASE("solve_on_branch inverts the left logistic branch") {
    MapSpec m = make_logistic(4.0);
    for (double y : {0.1, 0.3, 0.7, 0.8, 0.99}) {
        double x = solve_on_branch(m, Interval(0.0, 0.5), y);
        double expect = (1.0 - std::sqrt(1.0 - y)) / 2.0;
        CHECK(x == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("preimages_of_point") {
    MapSpec m = make_logistic(4.0);
    auto pre = preimages_of_point(m, 0.5);
    REQUIRE(pre.size() == 2);
    CHECK(pre[0] == doctest::Approx((1.0 - std::sqrt(0.5)) / 2.0).epsilon(1e-12));
    CHECK(pre[1] == doctest::Approx((1.0 + std::sqrt(0.5)) / 2.0).epsilon(1e-12));
    auto top = preimages_of_point(m, 1.0);
    REQUIRE(top.size() == 1);
    CHECK(top[0] == doctest::Approx(0.5).epsilon(1e-12));
    MapSpec c = make_cubic(4.0);
    CHECK(preimages_of_point(c, 0.0).size() == 3);
}

TEST_CASE("component_preimage: homeomorphic step") {
    MapSpec m = make_logistic(4.0);
    Interval I(0.7, 0.8);
    double x = 0.25; // f(0.25) = 0.75 inside I
    Interval K = component_preimage(m, I, x);
    CHECK(K.lo == doctest::Approx((1.0 - std::sqrt(0.3)) / 2.0).epsilon(1e-11));
    CHECK(K.hi == doctest::Approx((1.0 - std::sqrt(0.2)) / 2.0).epsilon(1e-11));
    Interval img = image(m, K);
    CHECK(I.lo - 1e-12 <= img.lo);
    CHECK(img.hi <= I.hi + 1e-12);
}

TEST_CASE("component_preimage: symmetric step through the extremum") {
    MapSpec m = make_logistic(4.0);
    Interval I(0.9, 1.0); // contains the critical value 1
    Interval K = component_preimage(m, I, 0.5);
    CHECK(K.lo == doctest::Approx((1.0 - std::sqrt(0.1)) / 2.0).epsilon(1e-11));
    CHECK(K.hi == doctest::Approx((1.0 + std::sqrt(0.1)) / 2.0).epsilon(1e-11));
    // both endpoints land on the boundary of I
    CHECK(m.eval(K.lo) == doctest::Approx(0.9).epsilon(1e-10));
    CHECK(m.eval(K.hi) == doctest::Approx(0.9).epsilon(1e-10));
}

TEST_CASE("component_preimage is maximal") {
    std::mt19937_64 rng(17);
    MapSpec m = make_logistic(4.0);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    int done = 0;
    for (int k = 0; k < 40000 && done < 100; ++k) {
        double a = u(rng), b = a + 0.05 * u(rng);
        if (b >= 0.99) continue;
        Interval I(a, b);
        double x = u(rng);
        double fx = m.eval(x);
        if (fx <= I.lo || fx >= I.hi) continue;
        Interval K = component_preimage(m, I, x);
        Interval img = image(m, K);
        CHECK(I.lo - 1e-12 <= img.lo);
        CHECK(img.hi <= I.hi + 1e-12);
        const double h = 1e-7;
        if (K.lo - h > 0.0) {
            Interval big(K.lo - h, K.hi);
            Interval bimg = image(m, big);
            CHECK((bimg.lo < I.lo || bimg.hi > I.hi));
        }
        if (K.hi + h < 1.0) {
            Interval big(K.lo, K.hi + h);
            Interval bimg = image(m, big);
            CHECK((bimg.lo < I.lo || bimg.hi > I.hi));
        }
        ++done;
    }
    CHECK(done == 100);
}

TEST_CASE("monotone_branch_fp finds the f^2 branch") {
    MapSpec m = make_logistic(4.0);
    std::vector<double> orbit{0.1, m.eval(0.1), 0.0, 0.0};
    orbit[2] = m.eval(orbit[1]);
    orbit[3] = m.eval(orbit[2]);
    Interval B = monotone_branch_fp(m, orbit, 0, 2);
    // f^2 folds where f(x) = 0.5: nearest turning points around 0.1
    double t = (1.0 - std::sqrt(0.5)) / 2.0; // ~0.1464
    CHECK(B.lo == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(B.hi == doctest::Approx(t).epsilon(1e-9));
    // monotone inside: derivative of f^2 keeps one sign
    int sign = 0;
    for (int i = 1; i < 50; ++i) {
        double x = B.lo + B.length() * i / 50.0;
        double d = fp_deriv(m, x, 2);
        if (d == 0.0) continue;
        int s = d > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        CHECK(s == sign);
    }
}

TEST_CASE("fp_eval and fp_deriv chain rule") {
    MapSpec m = make_logistic(3.5);
    double x = 0.3123;
    double y = x;
    double d = 1.0;
    for (int i = 0; i < 7; ++i) { d *= m.deriv_raw(y); y = m.eval(y); }
    CHECK(fp_eval(m, x, 7) == doctest::Approx(y).epsilon(1e-15));
    CHECK(fp_deriv(m, x, 7) == doctest::Approx(d).epsilon(1e-15));
}
