#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dynlab/branches.hpp"
#include "dynlab/map.hpp"

namespace dynlab {

namespace detail {

// eta: at most a third of the minimal gap between singular points
// (critical points and domain boundary), neighbourhoods inside the
// component interior, and small enough that the involution is defined on
// the whole eta-neighbourhood of every extremum.
inline double default_eta(const MapSpec& m) {
    std::vector<double> sing = m.boundary();
    for (const auto& c : m.critical_points) sing.push_back(c.location);
    std::sort(sing.begin(), sing.end());
    double gap = kInf;
    for (std::size_t i = 0; i + 1 < sing.size(); ++i)
        gap = std::min(gap, sing[i + 1] - sing[i]);
    for (const auto& c : m.critical_points) {
        const Interval& comp = m.component_of(c.location);
        gap = std::min(gap, 3.0 * std::min(c.location - comp.lo, comp.hi - c.location));
    }
    double eta = gap / 3.0;

    for (const auto& c : m.critical_points) {
        if (c.kind != CritKind::extremum) continue;
        const Interval& comp = m.component_of(c.location);
        double bl = comp.lo, br = comp.hi;
        for (const auto& e : m.critical_points) {
            if (e.kind != CritKind::extremum || e.location == c.location) continue;
            if (e.location < c.location) bl = std::max(bl, e.location);
            else br = std::min(br, e.location);
        }
        double fc = m.eval(c.location), fl = m.eval(bl), fr = m.eval(br);
        bool is_max = fc >= std::max(fl, fr);
        double common = is_max ? std::max(fl, fr) : std::min(fl, fr);
        // widest reach on each side where f still attains `common`
        double xl = (is_max ? fl >= common : fl <= common)
                        ? bl
                        : solve_on_branch(m, Interval(bl, c.location), common);
        double xr = (is_max ? fr >= common : fr <= common)
                        ? br
                        : solve_on_branch(m, Interval(c.location, br), common);
        eta = std::min(eta, 0.9 * std::min(c.location - xl, xr - c.location));
    }
    return eta;
}

// xi: sampled lower bound on image lengths of eta-length intervals
// containing a critical point. The sampling horizon is short: on maps
// with attracting cycles the infimum over all times degenerates to 0.
inline double sampled_xi(const MapSpec& m, int horizon = 8) {
    double best = kInf;
    for (const auto& c : m.critical_points) {
        const Interval& comp = m.component_of(c.location);
        for (int s = 1; s <= 9; ++s) {
            double t = s / 10.0;
            double lo = c.location - t * m.eta, hi = lo + m.eta;
            if (lo < comp.lo || hi > comp.hi) continue;
            best = std::min(best, min_image_length(m, Interval(lo, hi), horizon));
        }
    }
    if (!std::isfinite(best)) best = m.measure() / 4.0;
    return 0.9 * best;
}

inline void finalize(MapSpec& m, double eta_user, double xi_user) {
    double e = default_eta(m);
    m.eta = eta_user > 0.0 ? std::min(eta_user, e) : e;
    m.xi = xi_user > 0.0 ? xi_user : sampled_xi(m);
}

} // namespace detail

inline MapSpec make_logistic(double a, double eta_user = 0.0, double xi_user = 0.0) {
    MapSpec m;
    m.name = "logistic";
    m.params = {a};
    m.domain = {Interval(0.0, 1.0)};
    m.fn = LogisticFamily{a};
    CriticalPoint c;
    c.location = 0.5;
    c.kind = CritKind::extremum;
    c.exponent = 2.0;
    c.sign_left = -1;
    c.sign_right = -1;
    c.symmetric = true;
    m.critical_points = {c};
    detail::finalize(m, eta_user, xi_user);
    return m;
}

inline MapSpec make_cubic(double a, double eta_user = 0.0, double xi_user = 0.0) {
    if (a <= 1.0) throw std::invalid_argument("make_cubic: need a > 1 for two extrema");
    MapSpec m;
    m.name = "cubic";
    m.params = {a};
    m.domain = {Interval(-1.0, 1.0)};
    m.fn = CubicFamily{a};
    double xstar = std::sqrt((a - 1.0) / (3.0 * a));
    CriticalPoint cl, cr;
    cl.location = -xstar; cl.kind = CritKind::extremum; cl.exponent = 2.0;
    cl.sign_left = +1; cl.sign_right = +1; cl.symmetric = false;
    cr.location = xstar; cr.kind = CritKind::extremum; cr.exponent = 2.0;
    cr.sign_left = -1; cr.sign_right = -1; cr.symmetric = false;
    m.critical_points = {cl, cr};
    detail::finalize(m, eta_user, xi_user);
    return m;
}

inline MapSpec make_piecewise(std::vector<double> breakpoints,
                              std::vector<std::vector<double>> coeffs,
                              std::vector<CriticalPoint> crit = {},
                              double eta_user = 0.0, double xi_user = 0.0,
                              std::vector<Interval> domain = {}) {
    MapSpec m;
    m.name = "piecewise";
    if (domain.empty())
        domain = {Interval(breakpoints.front(), breakpoints.back())};
    m.domain = std::move(domain);
    PiecewiseFamily f;
    f.breakpoints = std::move(breakpoints);
    f.coeffs = std::move(coeffs);
    m.fn = std::move(f);
    std::sort(crit.begin(), crit.end(),
              [](const CriticalPoint& x, const CriticalPoint& y) { return x.location < y.location; });
    m.critical_points = std::move(crit);
    detail::finalize(m, eta_user, xi_user);
    return m;
}

struct ValidationCheck {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks) if (!c.pass) return false;
        return true;
    }
};

/// Validate the MapSpec invariants: forward invariance of M, the boundary
/// convention f(dM) in dM, disjoint eta-neighbourhoods inside the
/// interior, vanishing derivative and measured non-flatness exponent at
/// each declared critical point. Failures are reported, not thrown.
inline ValidationReport validate(const MapSpec& m) {
    ValidationReport rep;

    {
        ValidationCheck c{"f(M) subset M", true, 0.0, ""};
        double worst = 0.0;
        for (const auto& comp : m.domain) {
            Interval img = image(m, comp);
            bool inside = false;
            for (const auto& d : m.domain)
                if (d.lo - 1e-9 <= img.lo && img.hi <= d.hi + 1e-9) inside = true;
            if (!inside) {
                c.pass = false;
                c.detail = "image [" + fmt17(img.lo) + ", " + fmt17(img.hi) + "] escapes";
            }
            worst = std::max(worst, std::max(img.hi - m.hull().hi, m.hull().lo - img.lo));
        }
        c.measured = worst;
        rep.checks.push_back(c);
    }

    {
        ValidationCheck c{"f(dM) subset dM", true, 0.0, ""};
        double worst = 0.0;
        for (double b : m.boundary()) {
            double fb = m.eval(b);
            double d = kInf;
            for (double b2 : m.boundary()) d = std::min(d, std::abs(fb - b2));
            worst = std::max(worst, d);
            if (d > 1e-9) { c.pass = false; c.detail = "f(" + fmt17(b) + ") = " + fmt17(fb); }
        }
        c.measured = worst;
        rep.checks.push_back(c);
    }

    {
        ValidationCheck c{"eta neighbourhoods disjoint, interior", true, m.eta, ""};
        for (std::size_t i = 0; i < m.critical_points.size(); ++i) {
            double ci = m.critical_points[i].location;
            const Interval& comp = m.component_of(ci);
            if (ci - m.eta < comp.lo || ci + m.eta > comp.hi) {
                c.pass = false; c.detail = "neighbourhood exits component interior";
            }
            for (std::size_t j = i + 1; j < m.critical_points.size(); ++j)
                if (std::abs(ci - m.critical_points[j].location) <= 2.0 * m.eta) {
                    c.pass = false; c.detail = "neighbourhoods overlap";
                }
        }
        rep.checks.push_back(c);
    }

    for (const auto& cp : m.critical_points) {
        {
            ValidationCheck c{"derivative vanishes at " + fmt17(cp.location), true, 0.0, ""};
            c.measured = std::abs(m.deriv_raw(cp.location));
            c.pass = c.measured <= 1e-7;
            rep.checks.push_back(c);
        }
        // log-log slope of |f(x)-f(c)| vs |x-c| over the decade [1e-5, 1e-2]
        ValidationCheck c{"non-flatness exponent at " + fmt17(cp.location), true, 0.0, ""};
        double fc = m.eval(cp.location);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (int side = -1; side <= 1; side += 2) {
            for (int k = 0; k < 16; ++k) {
                double h = 1e-5 * std::pow(10.0, 3.0 * k / 15.0);
                double x = cp.location + side * h;
                if (!m.in_domain(x)) continue;
                double dy = std::abs(m.eval(x) - fc);
                if (dy <= 0.0) continue;
                double lx = std::log(h), ly = std::log(dy);
                sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
                ++cnt;
            }
        }
        if (cnt >= 8) {
            double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
            c.measured = slope;
            c.pass = std::abs(slope - cp.exponent) <= 0.05;
        } else {
            c.pass = false;
            c.detail = "too few usable samples";
        }
        rep.checks.push_back(c);
    }

    if (std::holds_alternative<PiecewiseFamily>(m.fn)) {
        const auto& f = std::get<PiecewiseFamily>(m.fn);
        ValidationCheck c{"C1 continuity across breakpoints", true, 0.0, ""};
        for (std::size_t i = 1; i + 1 < f.breakpoints.size(); ++i) {
            double b = f.breakpoints[i];
            double e = 1e-9 * (1.0 + std::abs(b));
            double j0 = std::abs(m.eval(b - e) - m.eval(b + e));
            double j1 = std::abs(m.deriv_raw(b - e) - m.deriv_raw(b + e));
            c.measured = std::max({c.measured, j0, j1});
            if (j0 > 1e-6 || j1 > 1e-4) { c.pass = false; c.detail = "jump at " + fmt17(b); }
        }
        rep.checks.push_back(c);
    }

    return rep;
}

} // namespace dynlab
