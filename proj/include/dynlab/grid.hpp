#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

#include "dynlab/branches.hpp"
#include "dynlab/interval.hpp"
#include "dynlab/map.hpp"

namespace dynlab {

/// Measurable-set approximation: a uniform grid bitmask over the hull of
/// the domain. The set represented is the union of the marked cells, so
/// measures and densities are computed exactly for that union.
/// Immutable-by-convention once an analysis has built it.
struct GridSet {
    double origin = 0.0;
    double h = 1.0;
    std::size_t n = 0;
    std::vector<std::uint64_t> bits;

    GridSet() = default;
    GridSet(double origin_, double h_, std::size_t n_)
        : origin(origin_), h(h_), n(n_), bits((n_ + 63) / 64, 0) {}

    static GridSet over(const Interval& hull, double h) {
        std::size_t n = std::size_t(std::ceil(hull.length() / h - 1e-9));
        if (n == 0) n = 1;
        return GridSet(hull.lo, h, n);
    }
    static GridSet over(const MapSpec& m, double h) { return over(m.hull(), h); }

    std::size_t cell_of(double x) const {
        double t = (x - origin) / h;
        if (t < 0.0) t = 0.0;
        std::size_t i = std::size_t(t);
        return i >= n ? n - 1 : i;
    }
    Interval cell_interval(std::size_t i) const {
        return Interval(origin + double(i) * h, origin + double(i + 1) * h);
    }
    bool test(std::size_t i) const { return (bits[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) { bits[i >> 6] |= std::uint64_t(1) << (i & 63); }
    void reset(std::size_t i) { bits[i >> 6] &= ~(std::uint64_t(1) << (i & 63)); }
    bool test_point(double x) const { return test(cell_of(x)); }
    void set_point(double x) { set(cell_of(x)); }

    /// Mark every cell whose intersection with I has positive length.
    void set_interval(const Interval& I) {
        if (I.length() < 0.0) return;
        double lo = std::max(I.lo, origin), hi = std::min(I.hi, origin + double(n) * h);
        if (hi <= lo && I.length() > 0.0) return;
        std::size_t a = cell_of(lo), b = cell_of(hi);
        if (I.length() == 0.0) { set(a); return; }
        // skip fringe cells that only touch at an endpoint
        if (cell_interval(a).hi <= lo + 1e-15 * h && a + 1 <= b) ++a;
        if (cell_interval(b).lo >= hi - 1e-15 * h && b >= a + 1) --b;
        for (std::size_t i = a; i <= b; ++i) set(i);
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : bits) c += std::size_t(std::popcount(w));
        return c;
    }
    double lambda() const { return double(count()) * h; }
    bool any() const {
        for (auto w : bits) if (w) return true;
        return false;
    }

    void unite(const GridSet& o) {
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] |= o.bits[i];
    }
    void intersect(const GridSet& o) {
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] &= o.bits[i];
    }
    bool operator==(const GridSet& o) const {
        return origin == o.origin && h == o.h && n == o.n && bits == o.bits;
    }

    std::size_t intersection_count(const GridSet& o) const {
        std::size_t c = 0;
        for (std::size_t i = 0; i < bits.size(); ++i)
            c += std::size_t(std::popcount(bits[i] & o.bits[i]));
        return c;
    }
    std::size_t union_count(const GridSet& o) const {
        std::size_t c = 0;
        for (std::size_t i = 0; i < bits.size(); ++i)
            c += std::size_t(std::popcount(bits[i] | o.bits[i]));
        return c;
    }
    double jaccard(const GridSet& o) const {
        std::size_t u = union_count(o);
        return u == 0 ? 1.0 : double(intersection_count(o)) / double(u);
    }
    double symmetric_difference_measure(const GridSet& o) const {
        std::size_t c = 0;
        for (std::size_t i = 0; i < bits.size(); ++i)
            c += std::size_t(std::popcount(bits[i] ^ o.bits[i]));
        return double(c) * h;
    }

    /// Maximal runs of set cells as [first, last] cell index pairs.
    std::vector<std::pair<std::size_t, std::size_t>> runs() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        std::size_t i = 0;
        while (i < n) {
            if (!test(i)) { ++i; continue; }
            std::size_t j = i;
            while (j + 1 < n && test(j + 1)) ++j;
            out.emplace_back(i, j);
            i = j + 1;
        }
        return out;
    }

    std::uint64_t hash() const {
        std::uint64_t hsh = 1469598103934665603ULL;
        for (auto w : bits) { hsh ^= w; hsh *= 1099511628211ULL; }
        return hsh;
    }
};

/// lambda(X cap I) computed exactly for X = union of marked cells
/// (end cells enter with their partial overlap).
inline double measure_in(const GridSet& X, const Interval& I) {
    if (I.length() <= 0.0) return 0.0;
    double lo = std::max(I.lo, X.origin);
    double hi = std::min(I.hi, X.origin + double(X.n) * X.h);
    if (hi <= lo) return 0.0;
    std::size_t a = X.cell_of(lo), b = X.cell_of(hi);
    double s = 0.0;
    for (std::size_t i = a; i <= b; ++i) {
        if (!X.test(i)) continue;
        Interval c = X.cell_interval(i);
        double o = std::min(c.hi, hi) - std::max(c.lo, lo);
        if (o > 0.0) s += o;
    }
    return s;
}

/// dens(X | I) = lambda(X cap I) / lambda(I).
inline double dens(const GridSet& X, const Interval& I) {
    if (I.length() <= 0.0) throw std::invalid_argument("dens: degenerate interval");
    return measure_in(X, I) / I.length();
}

/// One-sided density seen from a: sup over y of dens(X | [a, y]) where y
/// runs over I from a to the far endpoint. a must be an endpoint of I.
inline double dens_from(const GridSet& X, double a, const Interval& I) {
    if (I.length() <= 0.0) throw std::invalid_argument("dens_from: degenerate interval");
    double far;
    if (std::abs(a - I.lo) <= std::abs(a - I.hi)) far = I.hi;
    else far = I.lo;
    int dir = far > a ? +1 : -1;

    // candidate y values: ends (in walking direction) of set-cell runs,
    // plus the far endpoint; the running density has its local maxima there
    double best = 0.0;
    double acc = 0.0;      // measure of X in [a, y] so far
    std::size_t ia = X.cell_of(a), ib = X.cell_of(far);
    auto consider = [&](double y) {
        double len = std::abs(y - a);
        if (len <= 0.0) return;
        double d = acc / len;
        if (d > best) best = d;
    };
    if (dir > 0) {
        for (std::size_t i = ia; i <= ib; ++i) {
            if (!X.test(i)) continue;
            Interval c = X.cell_interval(i);
            double lo = std::max(c.lo, a), hi = std::min(c.hi, far);
            if (hi <= lo) continue;
            acc += hi - lo;
            consider(hi);
        }
    } else {
        for (std::size_t i = ia + 1; i-- > ib;) {
            if (!X.test(i)) continue;
            Interval c = X.cell_interval(i);
            double lo = std::max(c.lo, far), hi = std::min(c.hi, a);
            if (hi <= lo) continue;
            acc += hi - lo;
            consider(lo);
            if (i == 0) break;
        }
    }
    consider(far);
    return std::min(best, 1.0);
}

/// Cell-wise closure of `seed` under forward images and preimages, up to
/// `steps` rounds at the grid resolution. A superset approximation of the
/// smallest completely invariant set containing the seed.
inline GridSet invariant_hull(const MapSpec& m, const GridSet& seed, int steps) {
    GridSet X = seed;
    // branch list of f once
    std::vector<Interval> branches;
    for (const auto& comp : m.domain) {
        std::vector<double> cuts{comp.lo};
        for (const auto& c : m.critical_points)
            if (c.kind == CritKind::extremum && comp.contains_interior(c.location))
                cuts.push_back(c.location);
        cuts.push_back(comp.hi);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            branches.emplace_back(cuts[i], cuts[i + 1]);
    }
    for (int round = 0; round < steps; ++round) {
        GridSet next = X;
        for (auto [i, j] : X.runs()) {
            Interval R(X.cell_interval(i).lo, X.cell_interval(j).hi);
            next.set_interval(image(m, R));
            for (const auto& br : branches) {
                Interval bimg = image(m, br);
                if (!bimg.intersects(R)) continue;
                Interval seg = bimg.intersect(R);
                if (seg.length() <= 0.0) continue;
                double u = solve_on_branch(m, br, seg.lo);
                double v = solve_on_branch(m, br, seg.hi);
                next.set_interval(Interval(u, v));
            }
        }
        if (next == X) break;
        X = next;
    }
    return X;
}

} // namespace dynlab
