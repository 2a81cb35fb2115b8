#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dynlab/families.hpp"
#include "dynlab/map.hpp"

using namespace dynlab;

namespace {

MapSpec smooth_bump_piecewise() {
    // 3.2*x*(1-x) split at the extremum: exercises the piecewise path with
    // a C1 join and a symmetric extremum.
    return make_piecewise({0.0, 0.5, 1.0},
                          {{0.0, 3.2, -3.2}, {0.8, 0.0, -3.2}},
                          {[] {
                              CriticalPoint c;
                              c.location = 0.5;
                              c.symmetric = true;
                              return c;
                          }()});
}

} // namespace

TEST_CASE("eval on logistic family") {
    MapSpec m4 = make_logistic(4.0);
    CHECK(map_eval(m4, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(map_eval(m4, 0.0) == doctest::Approx(0.0).epsilon(1e-14));
    MapSpec m32 = make_logistic(3.2);
    CHECK(map_eval(m32, 0.5) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK_THROWS_AS(map_eval(m4, 1.5), std::domain_error);
    CHECK_THROWS_AS(map_eval(m4, -0.2), std::domain_error);
}

TEST_CASE("derivative values and critical-point zero") {
    MapSpec m4 = make_logistic(4.0);
    CHECK(map_deriv(m4, 0.5) == 0.0);
    CHECK(map_deriv(m4, 0.0) == doctest::Approx(4.0).epsilon(1e-14));
    MapSpec m32 = make_logistic(3.2);
    CHECK(map_deriv(m32, 0.25) == doctest::Approx(1.6).epsilon(1e-14));
    CHECK_THROWS_AS(map_deriv(m4, 2.0), std::domain_error);
}

TEST_CASE("derivative matches centered finite differences") {
    std::mt19937_64 rng(7);
    for (const MapSpec& m : {make_logistic(3.7), make_cubic(3.3), smooth_bump_piecewise()}) {
        Interval h = m.hull();
        std::uniform_real_distribution<double> u(h.lo + 1e-3, h.hi - 1e-3);
        int checked = 0;
        for (int k = 0; k < 2000 && checked < 1000; ++k) {
            double x = u(rng);
            bool near_crit = false;
            for (const auto& c : m.critical_points)
                if (std::abs(x - c.location) < 1e-3) near_crit = true;
            if (near_crit) continue;
            double st = 1e-6 * (1.0 + std::abs(x));
            if (!m.in_domain(x - st) || !m.in_domain(x + st)) continue;
            double fd = (m.eval(x + st) - m.eval(x - st)) / (2.0 * st);
            double d = map_deriv(m, x);
            CHECK(std::abs(fd - d) <= 1e-6 * std::max(1.0, std::abs(d)));
            ++checked;
        }
        CHECK(checked == 1000);
    }
}

TEST_CASE("involution: quadratic symmetry and fixed point") {
    MapSpec m = make_logistic(4.0);
    const CriticalPoint& c = m.critical_points[0];
    CHECK(involution(m, c, 0.4) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(involution(m, c, 0.5) == 0.5);
}

TEST_CASE("involution: root search on the asymmetric cubic") {
    MapSpec m = make_cubic(3.5);
    const CriticalPoint& cl = m.critical_points[0]; // left extremum
    double x = cl.location + 0.01;
    double xp = involution(m, cl, x);
    CHECK(xp < cl.location);
    CHECK(std::abs(m.eval(xp) - m.eval(x)) < 1e-9 * (1.0 + std::abs(m.eval(x))));
}

TEST_CASE("involution properties: f-compatibility and self-inverse") {
    std::mt19937_64 rng(11);
    for (const MapSpec& m : {make_logistic(3.9), make_cubic(3.2)}) {
        for (const auto& c : m.critical_points) {
            std::uniform_real_distribution<double> u(-m.eta * 0.95, m.eta * 0.95);
            for (int k = 0; k < 200; ++k) {
                double x = c.location + u(rng);
                double tx = involution(m, c, x);
                double fx = m.eval(x);
                CHECK(std::abs(m.eval(tx) - fx) <= 1e-9 * (1.0 + std::abs(fx)));
                double ttx = involution(m, c, tx);
                CHECK(std::abs(ttx - x) <= 1e-7 * (1.0 + std::abs(x)));
            }
        }
    }
}

TEST_CASE("involution errors") {
    MapSpec cub = make_piecewise({-1.0, 1.0}, {{0.0, 0.0, 0.0, 1.0}},
                                 {[] {
                                     CriticalPoint c;
                                     c.location = 0.0;
                                     c.kind = CritKind::inflection;
                                     return c;
                                 }()});
    CHECK_THROWS_AS(involution(cub, cub.critical_points[0], 0.01), std::invalid_argument);
    MapSpec m = make_logistic(4.0);
    CHECK_THROWS_AS(involution(m, m.critical_points[0], 0.5 + 2.0 * m.eta),
                    std::invalid_argument);
}

TEST_CASE("validate: admissible families pass") {
    for (const MapSpec& m : {make_logistic(4.0), make_logistic(3.2), make_cubic(3.5),
                             smooth_bump_piecewise()}) {
        ValidationReport rep = validate(m);
        for (const auto& c : rep.checks) {
            INFO(m.name, ": ", c.name, " measured=", c.measured, " ", c.detail);
            CHECK(c.pass);
        }
    }
    // measured exponent ~ 2 at the logistic extremum
    ValidationReport rep = validate(make_logistic(4.0));
    for (const auto& c : rep.checks)
        if (c.name.rfind("non-flatness", 0) == 0)
            CHECK(c.measured == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("validate: image escape detected for a = 4.2") {
    ValidationReport rep = validate(make_logistic(4.2));
    bool image_fail = false;
    for (const auto& c : rep.checks)
        if (c.name == "f(M) subset M" && !c.pass) image_fail = true;
    CHECK(image_fail);
    CHECK_FALSE(rep.all_pass());
}

TEST_CASE("validate: boundary convention violation detected") {
    MapSpec m = make_piecewise({0.0, 1.0}, {{0.3, 0.4}});
    ValidationReport rep = validate(m);
    bool boundary_fail = false;
    for (const auto& c : rep.checks)
        if (c.name == "f(dM) subset dM" && !c.pass) boundary_fail = true;
    CHECK(boundary_fail);
}

TEST_CASE("eta respects singular gaps") {
    MapSpec m = make_logistic(4.0);
    CHECK(m.eta == doctest::Approx(0.5 / 3.0));
    MapSpec m2 = make_logistic(4.0, 0.05);
    CHECK(m2.eta == doctest::Approx(0.05));
    CHECK(m.xi > 0.0);
}
