#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dynlab/common.hpp"
#include "dynlab/interval.hpp"

namespace dynlab {

enum class CritKind { extremum, inflection };

/// A declared critical point of the map. `exponent` is the non-flatness
/// order r (locally |f(x) - f(c)| ~ |x - c|^r, r >= 2 finite).
/// `symmetric` marks extrema whose two branches are exact mirror images,
/// so the local involution is the reflection 2c - x; otherwise the
/// involution is computed by root search.
struct CriticalPoint {
    double location = 0.0;
    CritKind kind = CritKind::extremum;
    double exponent = 2.0;
    int sign_left = -1;
    int sign_right = -1;
    bool symmetric = false;
};

struct LogisticFamily {
    double a = 4.0;
    double eval(double x) const { return a * x * (1.0 - x); }
    double deriv(double x) const { return a * (1.0 - 2.0 * x); }
};

/// Odd cubic a*x^3 + (1-a)*x on [-1,1]; bimodal for a > 1, boundary fixed.
struct CubicFamily {
    double a = 4.0;
    double eval(double x) const { return a * x * x * x + (1.0 - a) * x; }
    double deriv(double x) const { return 3.0 * a * x * x + (1.0 - a); }
};

/// Polynomial pieces on consecutive breakpoints; coefficients are in
/// ascending powers of (x - piece_left).
struct PiecewiseFamily {
    std::vector<double> breakpoints;              // size k+1, increasing
    std::vector<std::vector<double>> coeffs;      // size k

    std::size_t piece_of(double x) const {
        std::size_t k = coeffs.size();
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
        std::size_t i = it == breakpoints.begin() ? 0 : std::size_t(it - breakpoints.begin()) - 1;
        return std::min(i, k - 1);
    }
    double eval(double x) const {
        std::size_t i = piece_of(x);
        double t = x - breakpoints[i], v = 0.0;
        const auto& c = coeffs[i];
        for (std::size_t j = c.size(); j-- > 0;) v = v * t + c[j];
        return v;
    }
    double deriv(double x) const {
        std::size_t i = piece_of(x);
        double t = x - breakpoints[i], v = 0.0;
        const auto& c = coeffs[i];
        for (std::size_t j = c.size(); j-- > 1;) v = v * t + c[j] * double(j);
        return v;
    }
};

using Family = std::variant<LogisticFamily, CubicFamily, PiecewiseFamily>;

/// Immutable description of a smooth interval self-map: domain (finite
/// union of disjoint closed intervals), evaluators, declared critical
/// points, and the two scale constants eta and xi. Safe to share across
/// threads; all operations here are pure.
struct MapSpec {
    std::string name;
    std::vector<double> params;
    std::vector<Interval> domain;          // disjoint, sorted
    std::vector<CriticalPoint> critical_points; // sorted by location
    double eta = 0.0;
    double xi = 0.0;
    Family fn;

    double eval(double x) const {
        return std::visit([&](const auto& f) { return f.eval(x); }, fn);
    }
    double deriv_raw(double x) const {
        return std::visit([&](const auto& f) { return f.deriv(x); }, fn);
    }

    bool in_domain(double x, double slack = 1e-12) const {
        for (const auto& d : domain)
            if (d.lo - slack <= x && x <= d.hi + slack) return true;
        return false;
    }
    const Interval& component_of(double x) const {
        for (const auto& d : domain)
            if (d.lo - 1e-12 <= x && x <= d.hi + 1e-12) return d;
        throw std::domain_error("component_of: x outside domain");
    }
    Interval hull() const {
        return Interval(domain.front().lo, domain.back().hi);
    }
    double measure() const {
        double s = 0;
        for (const auto& d : domain) s += d.length();
        return s;
    }
    double clamp(double x) const {
        if (in_domain(x, 0.0)) return x;
        double best = domain.front().lo, bd = kInf;
        for (const auto& d : domain) {
            double c = clamp_to(d, x);
            if (std::abs(c - x) < bd) { bd = std::abs(c - x); best = c; }
        }
        return best;
    }

    std::vector<double> boundary() const {
        std::vector<double> b;
        for (const auto& d : domain) { b.push_back(d.lo); b.push_back(d.hi); }
        return b;
    }
    std::vector<double> extrema() const {
        std::vector<double> e;
        for (const auto& c : critical_points)
            if (c.kind == CritKind::extremum) e.push_back(c.location);
        return e;
    }
    const CriticalPoint* critical_at(double x, double tol) const {
        for (const auto& c : critical_points)
            if (std::abs(c.location - x) <= tol) return &c;
        return nullptr;
    }
};

/// Hoist the family dispatch out of hot loops: fn receives the concrete
/// family object (with inlinable eval/deriv).
template <class Fn>
decltype(auto) with_family(const MapSpec& m, Fn&& fn) {
    return std::visit(std::forward<Fn>(fn), m.fn);
}

inline double map_eval(const MapSpec& m, double x) {
    if (!m.in_domain(x)) throw std::domain_error("eval: x outside domain");
    return m.eval(x);
}

/// Derivative; returns exactly 0 at declared critical points.
inline double map_deriv(const MapSpec& m, double x) {
    if (!m.in_domain(x)) throw std::domain_error("derivative: x outside domain");
    if (m.critical_at(x, 1e-15 * (1.0 + std::abs(x)))) return 0.0;
    return m.deriv_raw(x);
}

/// Local involution at an extremum: the point on the other branch with the
/// same image. Exact reflection for symmetric extrema, root search over
/// the adjacent monotone branch otherwise. Accepts any x for which the
/// matching point exists on the adjacent branch; the eta-neighbourhood of
/// c always satisfies this, and for asymmetric extrema so does its
/// tau-image (which can reach slightly beyond eta).
inline double involution(const MapSpec& m, const CriticalPoint& c, double x) {
    if (c.kind != CritKind::extremum)
        throw std::invalid_argument("involution: not an extremum");
    if (c.symmetric || x == c.location) {
        if (std::abs(x - c.location) > m.eta + 1e-15)
            throw std::invalid_argument("involution: x outside eta-neighbourhood");
        return 2.0 * c.location - x;
    }

    // adjacent branch end on the other side of c
    int dir = x < c.location ? +1 : -1;
    const Interval& comp = m.component_of(c.location);
    double end = dir > 0 ? comp.hi : comp.lo;
    double near_end = dir > 0 ? comp.lo : comp.hi;
    for (const auto& e : m.critical_points) {
        if (e.kind != CritKind::extremum || e.location == c.location) continue;
        if (dir > 0 && e.location > c.location) end = std::min(end, e.location);
        if (dir < 0 && e.location < c.location) end = std::max(end, e.location);
        if (dir > 0 && e.location < c.location) near_end = std::max(near_end, e.location);
        if (dir < 0 && e.location > c.location) near_end = std::min(near_end, e.location);
    }
    if (x < std::min(near_end, end) || x > std::max(near_end, end))
        throw std::invalid_argument("involution: x outside eta-neighbourhood");

    double target = m.eval(x);
    double fc = m.eval(c.location);
    double fe = m.eval(end);
    if ((target - fc) * (target - fe) > 0.0)
        throw std::invalid_argument("involution: x outside eta-neighbourhood");
    double lo = c.location, hi = end;
    bool is_max = fc >= fe;
    for (int k = 0; k < 200; ++k) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        double fm = m.eval(mid);
        bool near_side = is_max ? (fm >= target) : (fm <= target);
        (near_side ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace dynlab
