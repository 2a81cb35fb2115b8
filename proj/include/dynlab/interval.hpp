#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dynlab {

/// Closed interval [lo, hi], lo <= hi. Degenerate (lo == hi) intervals are
/// permitted; callers that cannot accept them must check length().
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double a, double b) : lo(std::min(a, b)), hi(std::max(a, b)) {}

    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }

    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains_interior(double x) const { return lo < x && x < hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool contains_strictly(const Interval& o) const { return lo < o.lo && o.hi < hi; }
    bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

    Interval hull(const Interval& o) const {
        return Interval(std::min(lo, o.lo), std::max(hi, o.hi));
    }
    Interval intersect(const Interval& o) const {
        double a = std::max(lo, o.lo), b = std::min(hi, o.hi);
        if (a > b) throw std::domain_error("Interval::intersect: empty");
        Interval r; r.lo = a; r.hi = b; return r;
    }
    bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

inline Interval hull_pt(const Interval& I, double x) {
    return Interval(std::min(I.lo, x), std::max(I.hi, x));
}

inline double clamp_to(const Interval& I, double x) {
    return std::min(std::max(x, I.lo), I.hi);
}

} // namespace dynlab
