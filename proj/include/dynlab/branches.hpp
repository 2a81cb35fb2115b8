#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dynlab/interval.hpp"
#include "dynlab/map.hpp"

namespace dynlab {

/// Exact image of an interval: the hull of the endpoint values and the
/// critical values of extrema inside J. Interval images are always
/// computed this way, never by sampling.
inline Interval image(const MapSpec& m, const Interval& J) {
    double a = m.eval(J.lo), b = m.eval(J.hi);
    double lo = std::min(a, b), hi = std::max(a, b);
    for (const auto& c : m.critical_points) {
        if (c.kind != CritKind::extremum) continue;
        if (J.lo < c.location && c.location < J.hi) {
            double v = m.eval(c.location);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    Interval r; r.lo = lo; r.hi = hi; return r;
}

inline Interval image_n(const MapSpec& m, Interval J, int n) {
    for (int i = 0; i < n; ++i) J = image(m, J);
    return J;
}

/// min over 0 < k <= N of lambda(f^k J).
inline double min_image_length(const MapSpec& m, Interval J, int N) {
    double best = kInf;
    for (int k = 1; k <= N; ++k) {
        J = image(m, J);
        best = std::min(best, J.length());
    }
    return N >= 1 ? best : 0.0;
}

/// Monotone branch of f containing x: the maximal interval around x
/// bounded by adjacent extrema or the component boundary.
inline Interval branch_of(const MapSpec& m, double x) {
    const Interval& comp = m.component_of(x);
    double lo = comp.lo, hi = comp.hi;
    for (const auto& c : m.critical_points) {
        if (c.kind != CritKind::extremum) continue;
        double e = c.location;
        if (!comp.contains(e)) continue;
        if (e == x) { // on an extremum: take the branch to its right
            double nhi = comp.hi;
            for (const auto& c2 : m.critical_points)
                if (c2.kind == CritKind::extremum && c2.location > x && comp.contains(c2.location))
                    nhi = std::min(nhi, c2.location);
            Interval r; r.lo = x; r.hi = nhi; return r;
        }
        if (e < x) lo = std::max(lo, e);
        else hi = std::min(hi, e);
    }
    Interval r; r.lo = lo; r.hi = hi; return r;
}

/// Solve f(y) = target for y in [br.lo, br.hi] where f is monotone.
/// Requires target between the endpoint values.
inline double solve_on_branch(const MapSpec& m, const Interval& br, double target) {
    double fl = m.eval(br.lo), fh = m.eval(br.hi);
    bool inc = fl <= fh;
    double lo = br.lo, hi = br.hi;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        double fm = m.eval(mid);
        bool left = inc ? (fm < target) : (fm > target);
        (left ? lo : hi) = mid;
    }
    double mid = 0.5 * (lo + hi);
    return std::abs(m.eval(lo) - target) <= std::abs(m.eval(mid) - target) ? lo : mid;
}

/// All preimages of y under f, one per monotone branch that attains y.
inline std::vector<double> preimages_of_point(const MapSpec& m, double y) {
    std::vector<double> cuts, out;
    for (const auto& comp : m.domain) {
        cuts.clear();
        cuts.push_back(comp.lo);
        for (const auto& c : m.critical_points)
            if (c.kind == CritKind::extremum && comp.contains_interior(c.location))
                cuts.push_back(c.location);
        cuts.push_back(comp.hi);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            Interval br(cuts[i], cuts[i + 1]);
            double fl = m.eval(br.lo), fh = m.eval(br.hi);
            if ((y - fl) * (y - fh) > 0.0) continue;
            double r = solve_on_branch(m, br, y);
            // snap onto a critical point across the flat spot at critical values
            for (const auto& cp : m.critical_points)
                if (std::abs(r - cp.location) < 1e-7 &&
                    std::abs(m.eval(cp.location) - y) <= std::abs(m.eval(r) - y))
                    r = cp.location;
            out.push_back(r);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              out.end());
    return out;
}

namespace detail {

// Walk one side of the component of f^{-1}(target) containing x.
// dir = -1 walks left, +1 walks right. f(x) must lie in target.
inline double preimage_walk(const MapSpec& m, const Interval& target, double x, int dir) {
    const Interval& comp = m.component_of(x);
    std::vector<double> ext;
    for (const auto& c : m.critical_points)
        if (c.kind == CritKind::extremum && comp.contains_interior(c.location))
            ext.push_back(c.location);

    double cur = x;
    for (std::size_t guard = 0; guard <= ext.size() + 1; ++guard) {
        // next obstacle in the walking direction
        double stop = dir < 0 ? comp.lo : comp.hi;
        bool stop_is_boundary = true;
        for (double e : ext) {
            if (dir < 0 && e < cur && e > stop) { stop = e; stop_is_boundary = false; }
            if (dir > 0 && e > cur && e < stop) { stop = e; stop_is_boundary = false; }
        }
        double fs = m.eval(stop);
        if (fs >= target.lo && fs <= target.hi) {
            if (stop_is_boundary) return stop;
            cur = stop;                       // branch end still inside: cross it
            continue;
        }
        double bound = fs < target.lo ? target.lo : target.hi;
        Interval br(std::min(cur, stop), std::max(cur, stop));
        return solve_on_branch(m, br, bound);
    }
    return cur;
}

} // namespace detail

/// Maximal interval K containing x with f(K) inside target (the connected
/// component of f^{-1}(target) through x). One pull-back step.
inline Interval component_preimage(const MapSpec& m, const Interval& target, double x) {
    double fx = m.eval(x);
    double slack = 1e-12 * (1.0 + std::abs(target.lo) + std::abs(target.hi));
    if (fx < target.lo - slack || fx > target.hi + slack)
        throw std::invalid_argument("component_preimage: f(x) outside target");
    double L = detail::preimage_walk(m, target, x, -1);
    double R = detail::preimage_walk(m, target, x, +1);
    return Interval(L, R);
}

inline double fp_eval(const MapSpec& m, double x, int p) {
    return with_family(m, [&](const auto& f) {
        double y = x;
        for (int i = 0; i < p; ++i) y = f.eval(y);
        return y;
    });
}

inline double fp_deriv(const MapSpec& m, double x, int p) {
    return with_family(m, [&](const auto& f) {
        double y = x, d = 1.0;
        for (int i = 0; i < p; ++i) { d *= f.deriv(y); y = f.eval(y); }
        return d;
    });
}

namespace detail {

// Bisection for f^j(k) = v on [a, b] where f^j is monotone there.
inline double solve_fp_monotone(const MapSpec& m, double a, double b, int j, double v) {
    double fa = fp_eval(m, a, j), fb = fp_eval(m, b, j);
    bool inc = fa <= fb;
    double lo = a, hi = b;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        double fm = fp_eval(m, mid, j);
        bool left = inc ? (fm < v) : (fm > v);
        (left ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Maximal interval around orbit[m] on which f^p is monotone, computed by
/// forward restriction: at each step the running image is cut back to the
/// monotone branch of f containing the orbit point, and cuts are pulled
/// back to base coordinates. Returns a degenerate interval if the orbit
/// hits a turning point exactly.
inline Interval monotone_branch_fp(const MapSpec& m, const std::vector<double>& orbit,
                                   int mstart, int p) {
    double x = orbit[mstart];
    const Interval& comp0 = m.component_of(x);
    double kl = comp0.lo, kr = comp0.hi;
    double al = kl, ar = kr; // f^j(kl), f^j(kr)
    for (int j = 0; j < p; ++j) {
        double y = orbit[mstart + j];
        const CriticalPoint* hit = m.critical_at(y, 0.0);
        if (hit && hit->kind == CritKind::extremum && j > 0) {
            Interval d; d.lo = x; d.hi = x; return d;
        }
        Interval br = branch_of(m, y);
        for (int side = 0; side < 2; ++side) {
            double& k = side == 0 ? kl : kr;
            double& a = side == 0 ? al : ar;
            if (a < br.lo) {
                k = detail::solve_fp_monotone(m, std::min(k, x), std::max(k, x), j, br.lo);
                a = br.lo;
            } else if (a > br.hi) {
                k = detail::solve_fp_monotone(m, std::min(k, x), std::max(k, x), j, br.hi);
                a = br.hi;
            }
        }
        al = m.eval(al);
        ar = m.eval(ar);
    }
    return Interval(kl, kr);
}

} // namespace dynlab
