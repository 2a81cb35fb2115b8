#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dynlab/branches.hpp"
#include "dynlab/common.hpp"
#include "dynlab/grid.hpp"
#include "dynlab/map.hpp"

namespace dynlab {

struct OrbitRecord {
    double start = 0.0;
    std::vector<double> points; // x_0 .. x_n
    int clamped_events = 0;     // roundoff ejections, clamped back into M
};

inline OrbitRecord iterate(const MapSpec& m, double x, long n) {
    if (!m.in_domain(x)) throw std::domain_error("iterate: x outside domain");
    if (n < 0) throw std::invalid_argument("iterate: n < 0");
    OrbitRecord rec;
    rec.start = x;
    rec.points.reserve(std::size_t(n) + 1);
    rec.points.push_back(x);
    with_family(m, [&](const auto& f) {
        double y = x;
        for (long k = 0; k < n; ++k) {
            y = f.eval(y);
            if (!m.in_domain(y)) { y = m.clamp(y); ++rec.clamped_events; }
            rec.points.push_back(y);
        }
    });
    return rec;
}

struct CycleEstimate {
    std::vector<double> points;
    int period = 0;
    double multiplier = 0.0;
    enum class Stability { attracting, parabolic, repelling } stability =
        Stability::attracting;
    double residual = 0.0;
    bool parabolic_by_decay = false;
};

struct CycleSearch {
    long max_iter = 1'000'000;
    int p_max = 4096;
    double tol_cycle = 1e-10;
    double tol_mult = 1e-6;
    double coarse_tol = 1e-9;
    int parabolic_p_max = 64;
    long parabolic_window = 10'000;
};

struct CycleOutcome {
    std::optional<CycleEstimate> cycle;
    bool maybe_converging = false; // decay seen but not resolved within budget
    long steps_used = 0;
};

namespace detail {

inline std::vector<int> divisors(int p) {
    std::vector<int> d;
    for (int q = 1; q * q <= p; ++q)
        if (p % q == 0) {
            d.push_back(q);
            if (q != p / q) d.push_back(p / q);
        }
    std::sort(d.begin(), d.end());
    return d;
}

template <class F>
std::optional<CycleEstimate> refine_cycle(const MapSpec& m, const F& f, double z0,
                                          int p, const CycleSearch& ps) {
    double scale = m.hull().length();
    double z = z0;
    for (int it = 0; it < 120; ++it) {
        double y = z, gp = 1.0;
        for (int i = 0; i < p; ++i) { gp *= f.deriv(y); y = f.eval(y); }
        double g = y - z;
        if (std::abs(g) <= ps.tol_cycle * 0.25) break;
        double den = gp - 1.0;
        if (std::abs(den) < 1e-12) den = den < 0 ? -1e-12 : 1e-12;
        double step = -g / den;
        double cap = 0.02 * scale;
        if (std::abs(step) > cap) step = step < 0 ? -cap : cap;
        double zn = z + step;
        if (!m.in_domain(zn)) zn = m.clamp(zn);
        if (zn == z) break;
        z = zn;
    }
    double res = std::abs(fp_eval(m, z, p) - z);
    if (res > ps.tol_cycle) return std::nullopt;

    // minimal period
    for (int q : divisors(p)) {
        if (q == p) break;
        if (std::abs(fp_eval(m, z, q) - z) <= ps.tol_cycle) { p = q; break; }
    }
    CycleEstimate ce;
    ce.period = p;
    double y = z, mult = 1.0;
    for (int i = 0; i < p; ++i) {
        ce.points.push_back(y);
        mult *= f.deriv(y);
        y = f.eval(y);
    }
    ce.residual = 0.0;
    for (double zi : ce.points)
        ce.residual = std::max(ce.residual, std::abs(fp_eval(m, zi, p) - zi));
    if (ce.residual > ps.tol_cycle) return std::nullopt;
    ce.multiplier = mult;
    double am = std::abs(mult);
    ce.stability = am < 1.0 - ps.tol_mult ? CycleEstimate::Stability::attracting
                   : am <= 1.0 + ps.tol_mult ? CycleEstimate::Stability::parabolic
                                             : CycleEstimate::Stability::repelling;
    return ce;
}

// Sustained-window check: the lag-p differences must stay small and must
// not grow; kills chaotic near-returns.
template <class F>
bool sustained_at_lag(const MapSpec& m, const F& f, double x, int p, long window) {
    std::vector<double> ring(std::size_t(p));
    double y = x;
    for (int i = 0; i < p; ++i) { ring[std::size_t(i)] = y; y = f.eval(y); if (!m.in_domain(y)) return false; }
    double first = -1.0, last = 0.0;
    for (long t = 0; t < window; ++t) {
        double d = std::abs(y - ring[std::size_t(t % p)]);
        if (d > 1e-6) return false;
        if (first < 0) first = d;
        last = d;
        ring[std::size_t(t % p)] = y;
        y = f.eval(y);
        if (!m.in_domain(y)) return false;
    }
    return last <= std::max(first, 1e-12);
}

} // namespace detail

/// Detect an attracting, parabolic, or exactly-hit cycle in the tail of
/// orb(x). Returns the cycle with root-polished points, minimal period,
/// and the multiplier along the cycle. Parabolic cycles are also accepted
/// via monotone decay of lag differences.
inline CycleOutcome detect_cycle_ex(const MapSpec& m, double x0, const CycleSearch& ps) {
    CycleOutcome out;
    with_family(m, [&](const auto& f) {
        double x = x0;
        double anchor = x0;
        long anchor_step = 0, next_anchor = 64;
        int attempts = 0;
        struct Probe { int p; double d; };
        std::vector<Probe> probes;

        for (long k = 1; k <= ps.max_iter; ++k) {
            x = f.eval(x);
            if (!m.in_domain(x)) x = m.clamp(x);
            long lag = k - anchor_step;
            if (lag >= 1 && lag <= ps.p_max && std::abs(x - anchor) < ps.coarse_tol &&
                attempts < 64) {
                ++attempts;
                int p = int(lag);
                long window = std::max<long>(3L * p, 48);
                if (detail::sustained_at_lag(m, f, x, p, window)) {
                    auto ce = detail::refine_cycle(m, f, x, p, ps);
                    if (ce) {
                        out.cycle = std::move(ce);
                        out.steps_used = k;
                        return;
                    }
                }
            }
            if (k == next_anchor) {
                int pm = std::min(ps.parabolic_p_max, ps.p_max);
                double y = x, dbest = kInf;
                int pbest = 0;
                for (int p = 1; p <= pm; ++p) {
                    y = f.eval(y);
                    if (!m.in_domain(y)) { y = m.clamp(y); }
                    double d = std::abs(y - x);
                    if (d < dbest) { dbest = d; pbest = p; }
                }
                probes.push_back({pbest, dbest});
                anchor = x;
                anchor_step = k;
                next_anchor *= 2;
            }
        }
        out.steps_used = ps.max_iter;

        // parabolic path: stable best lag with decreasing differences
        if (probes.size() >= 3) {
            auto& a = probes[probes.size() - 3];
            auto& b = probes[probes.size() - 2];
            auto& c = probes[probes.size() - 1];
            if (a.p == b.p && b.p == c.p && c.d < b.d && b.d < a.d && c.d < 1e-2) {
                out.maybe_converging = true;
                int p = c.p;
                std::vector<double> ring(std::size_t(p));
                double y = x;
                for (int i = 0; i < p; ++i) { ring[std::size_t(i)] = y; y = f.eval(y); }
                bool mono = true;
                double prev = kInf;
                for (long t = 0; t < ps.parabolic_window && mono; ++t) {
                    double d = std::abs(y - ring[std::size_t(t % p)]);
                    if (d > prev * (1.0 + 1e-9)) mono = false;
                    prev = d;
                    ring[std::size_t(t % p)] = y;
                    y = f.eval(y);
                }
                if (mono) {
                    auto ce = detail::refine_cycle(m, f, y, p, ps);
                    if (ce) {
                        ce->parabolic_by_decay = true;
                        out.cycle = std::move(ce);
                        out.maybe_converging = false;
                    }
                }
            }
        }
    });
    return out;
}

inline std::optional<CycleEstimate> detect_cycle(const MapSpec& m, double x0,
                                                 long max_iter = 1'000'000,
                                                 double tol_cycle = 1e-10,
                                                 int p_max = 4096) {
    CycleSearch ps;
    ps.max_iter = max_iter;
    ps.tol_cycle = tol_cycle;
    ps.p_max = p_max;
    return detect_cycle_ex(m, x0, ps).cycle;
}

/// Grid-cell closure of the orbit segment [burn_in, burn_in + n_collect]:
/// an approximation of omega(x) from above at resolution grid_h.
inline GridSet omega_limit(const MapSpec& m, double x, long burn_in, long n_collect,
                           double grid_h) {
    if (burn_in < 0 || n_collect <= 0 || grid_h <= 0)
        throw std::invalid_argument("omega_limit: parameters must be positive");
    GridSet g = GridSet::over(m, grid_h);
    with_family(m, [&](const auto& f) {
        double y = x;
        for (long k = 0; k < burn_in; ++k) {
            y = f.eval(y);
            if (!m.in_domain(y)) y = m.clamp(y);
        }
        for (long k = 0; k <= n_collect; ++k) {
            g.set_point(y);
            y = f.eval(y);
            if (!m.in_domain(y)) y = m.clamp(y);
        }
    });
    return g;
}

struct PeriodicIntervalCycle {
    Interval interval;
    int period = 1;
    bool is_homterval = false;
};

namespace detail {

// critical points of f^p, grouped by the first iterate j at which the
// orbit meets C(f); levels[j] are the new points added at depth j
inline std::vector<std::vector<double>> critical_levels(const MapSpec& m, int p_max,
                                                        std::size_t cap = 200000) {
    std::vector<std::vector<double>> levels;
    std::vector<double> cur;
    for (const auto& c : m.critical_points) cur.push_back(c.location);
    std::sort(cur.begin(), cur.end());
    levels.push_back(cur);
    std::size_t total = cur.size();
    for (int j = 1; j < p_max; ++j) {
        std::vector<double> next;
        for (double v : levels[std::size_t(j) - 1])
            for (double pre : preimages_of_point(m, v)) next.push_back(pre);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                   next.end());
        total += next.size();
        levels.push_back(std::move(next));
        if (total > cap) break;
    }
    return levels;
}

// first x in [lo, hi] with pred(x) true: linear scan, then bisect the
// first flip
template <class Pred>
std::optional<double> first_true(Pred&& pred, double lo, double hi, int scan = 160) {
    if (pred(lo)) return lo;
    double prev = lo;
    for (int i = 1; i <= scan; ++i) {
        double x = lo + (hi - lo) * i / scan;
        if (pred(x)) {
            double a = prev, b = x; // pred(a) false, pred(b) true
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (a + b);
                (pred(mid) ? b : a) = mid;
            }
            return b;
        }
        prev = x;
    }
    return std::nullopt;
}

template <class Pred>
std::optional<double> last_true(Pred&& pred, double lo, double hi, int scan = 160) {
    auto r = first_true([&](double t) { return pred(lo + hi - t); }, lo, hi, scan);
    if (!r) return std::nullopt;
    return lo + hi - *r;
}

} // namespace detail

/// All maximal intervals I with f^p|I monotone and f^p(I) inside I for
/// some p <= p_max, found by scanning monotone branches of f^p between
/// consecutive critical points of f^p. Intervals whose interior meets an
/// attracting limit cycle are excluded: those lie inside cycle realms and
/// carry no extra dynamics. Containment duplicates keep the smallest p.
inline std::vector<PeriodicIntervalCycle> detect_homtervals(const MapSpec& m, int p_max = 8) {
    auto levels = detail::critical_levels(m, p_max);
    std::vector<PeriodicIntervalCycle> found;
    const double minlen = 1e-9;

    std::vector<double> cuts;
    for (int p = 1; p <= p_max && std::size_t(p) <= levels.size(); ++p) {
        cuts.clear();
        for (int j = 0; j < p && std::size_t(j) < levels.size(); ++j)
            for (double v : levels[std::size_t(j)]) cuts.push_back(v);
        for (const auto& comp : m.domain) { cuts.push_back(comp.lo); cuts.push_back(comp.hi); }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                   cuts.end());

        for (const auto& comp : m.domain) {
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                double A = cuts[i], B = cuts[i + 1];
                if (A < comp.lo - 1e-12 || B > comp.hi + 1e-12) continue;
                if (B - A < minlen) continue;
                auto g = [&](double x) { return fp_eval(m, x, p); };
                double gA = g(A), gB = g(B);
                if (gA == gB) continue;
                double u = kInf, v = -kInf;
                if (gA < gB) { // increasing branch
                    auto uo = detail::first_true([&](double x) { return g(x) >= x; }, A, B);
                    auto vo = detail::last_true([&](double x) { return g(x) <= x; }, A, B);
                    if (!uo || !vo) continue;
                    u = *uo;
                    v = *vo;
                } else { // decreasing branch: fixed point beta must exist
                    auto dg = [&](double x) { return g(x) - x; };
                    if (dg(A) < 0.0 || dg(B) > 0.0) continue;
                    double a = A, b = B;
                    for (int it = 0; it < 100; ++it) {
                        double mid = 0.5 * (a + b);
                        (dg(mid) >= 0.0 ? a : b) = mid;
                    }
                    double beta = 0.5 * (a + b);
                    auto g2 = [&](double x) { return g(g(x)); };
                    // widest u in [A, beta]: g2(u) >= u and g(u) <= B
                    auto up = [&](double x) { return g2(x) >= x && g(x) <= B; };
                    auto vp = [&](double x) { return g2(x) <= x && g(x) >= A; };
                    double uu = beta, vv = beta;
                    if (up(A)) uu = A;
                    else {
                        double lo2 = A, hi2 = beta;
                        bool any = false;
                        for (int s = 0; s <= 120; ++s) {
                            double xx = A + (beta - A) * s / 120.0;
                            if (up(xx)) { hi2 = xx; any = true; break; }
                            lo2 = xx;
                        }
                        if (any)
                            for (int it = 0; it < 80; ++it) {
                                double mid = 0.5 * (lo2 + hi2);
                                (up(mid) ? hi2 : lo2) = mid;
                            }
                        uu = hi2;
                    }
                    if (vp(B)) vv = B;
                    else {
                        double lo2 = beta, hi2 = B;
                        bool any = false;
                        for (int s = 0; s <= 120; ++s) {
                            double xx = B - (B - beta) * s / 120.0;
                            if (vp(xx)) { lo2 = xx; any = true; break; }
                            hi2 = xx;
                        }
                        if (any)
                            for (int it = 0; it < 80; ++it) {
                                double mid = 0.5 * (lo2 + hi2);
                                (vp(mid) ? lo2 : hi2) = mid;
                            }
                        vv = lo2;
                    }
                    // enforce pair consistency
                    for (int r = 0; r < 4; ++r) {
                        bool changed = false;
                        if (g(uu) > vv + 1e-14) {
                            uu = detail::solve_fp_monotone(m, uu, beta, p, vv);
                            changed = true;
                        }
                        if (g(vv) < uu - 1e-14) {
                            vv = detail::solve_fp_monotone(m, beta, vv, p, uu);
                            changed = true;
                        }
                        if (!changed) break;
                    }
                    u = uu; v = vv;
                }
                if (!(u < v - minlen)) continue;
                Interval I(u, v);
                Interval img = image_n(m, I, p);
                double slack = 1e-9;
                if (img.lo < I.lo - slack || img.hi > I.hi + slack) continue;
                found.push_back({I, p, true});
            }
        }
    }

    // drop intervals contained in another found interval; keep smallest p
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (a.interval.length() != b.interval.length())
            return a.interval.length() > b.interval.length();
        return a.period < b.period;
    });
    std::vector<PeriodicIntervalCycle> kept;
    for (const auto& f : found) {
        bool dup = false;
        for (auto& k : kept) {
            if (k.interval.lo - 1e-9 <= f.interval.lo && f.interval.hi <= k.interval.hi + 1e-9) {
                dup = true;
                if (f.interval.length() >= k.interval.length() - 1e-9 && f.period < k.period)
                    k.period = f.period;
                break;
            }
        }
        if (!dup) kept.push_back(f);
    }

    // exclude intervals whose interior carries an attracting limit cycle
    std::vector<PeriodicIntervalCycle> out;
    for (const auto& k : kept) {
        bool excluded = false;
        for (int s = 1; s <= 3 && !excluded; ++s) {
            double x = k.interval.lo + k.interval.length() * s / 4.0;
            CycleSearch ps;
            ps.max_iter = 20000;
            ps.p_max = std::max(64, 4 * p_max);
            auto oc = detect_cycle_ex(m, x, ps);
            if (oc.cycle && oc.cycle->stability == CycleEstimate::Stability::attracting)
                for (double z : oc.cycle->points)
                    if (k.interval.contains_interior(z)) excluded = true;
        }
        if (!excluded) out.push_back(k);
    }
    return out;
}

/// Nested restrictive intervals around the extremum c: each level is a
/// c-symmetric interval J = [z, tau(z)] bounded by a non-attracting fixed
/// point of f^p, with f^p(J) inside J and p the first return time of the
/// critical orbit to J. Levels strictly nest with strictly increasing
/// periods; the list ends when no further level exists below p_max.
struct CascadeResult {
    std::vector<PeriodicIntervalCycle> levels;
    bool saturated = false; // stopped because the next period would exceed p_max
};

inline CascadeResult renormalization_cascade_ex(const MapSpec& m, const CriticalPoint& c,
                                                int p_max) {
    if (c.kind != CritKind::extremum)
        throw std::invalid_argument("renormalization_cascade: not an extremum");
    CascadeResult res;
    const double cl = c.location;
    std::vector<double> corb(std::size_t(p_max) + 1);
    corb[0] = cl;
    for (int t = 1; t <= p_max; ++t) {
        corb[std::size_t(t)] = m.eval(corb[std::size_t(t) - 1]);
        if (!m.in_domain(corb[std::size_t(t)])) corb[std::size_t(t)] = m.clamp(corb[std::size_t(t)]);
    }

    Interval J_prev = m.component_of(cl);
    int p_prev = 1;
    bool hit_pmax = false;

    for (int level = 0; level < 64; ++level) {
        // candidate periods: strictly closer returns of the critical orbit
        // into J_prev, plus small multiples of the current period
        std::vector<int> cands;
        double dmin = std::abs(corb[std::size_t(p_prev)] - cl);
        for (int t = p_prev + 1; t <= p_max; ++t) {
            double xt = corb[std::size_t(t)];
            if (!J_prev.contains_interior(xt)) continue;
            double d = std::abs(xt - cl);
            if (d < dmin * (1.0 - 1e-12)) { cands.push_back(t); dmin = d; }
        }
        for (int mult : {2, 3}) {
            long t = long(mult) * p_prev;
            if (t > p_max) { hit_pmax = true; continue; }
            if (J_prev.contains_interior(corb[std::size_t(t)])) cands.push_back(int(t));
        }
        std::sort(cands.begin(), cands.end());
        cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
        if (cands.size() > 8) cands.resize(8);

        bool found = false;
        for (int p : cands) {
            // fixed points of f^p inside J_prev, walking outward from c
            const int scan = 2000;
            double step = J_prev.length() / (2.0 * scan);
            std::vector<double> roots;
            for (int dir = -1; dir <= 1; dir += 2) {
                double prev = cl;
                double gprev = fp_eval(m, prev, p) - prev;
                int got = 0;
                for (int s = 1; s <= scan && got < 6; ++s) {
                    double x = cl + dir * s * step;
                    if (!J_prev.contains_interior(x)) break;
                    double g = fp_eval(m, x, p) - x;
                    if (g == 0.0) { roots.push_back(x); ++got; }
                    else if (gprev != 0.0 && (g < 0) != (gprev < 0)) {
                        double a = prev, b = x;
                        bool sa = gprev < 0;
                        for (int it = 0; it < 90; ++it) {
                            double mid = 0.5 * (a + b);
                            double gm = fp_eval(m, mid, p) - mid;
                            ((gm < 0) == sa ? a : b) = mid;
                        }
                        roots.push_back(0.5 * (a + b));
                        ++got;
                    }
                    prev = x;
                    gprev = g;
                }
            }
            std::sort(roots.begin(), roots.end(), [&](double a, double b) {
                return std::abs(a - cl) < std::abs(b - cl);
            });
            for (double z : roots) {
                if (std::abs(fp_deriv(m, z, p)) < 1.0 - 1e-6) continue; // attracting boundary
                double tz;
                try {
                    tz = involution(m, c, z);
                } catch (const std::exception&) {
                    continue;
                }
                Interval J(std::min(z, tz), std::max(z, tz));
                if (!(J.length() > 1e-12)) continue;
                if (!J.contains_interior(cl)) continue;
                if (!(J_prev.lo < J.lo && J.hi < J_prev.hi)) continue; // strict nesting
                Interval img = image_n(m, J, p);
                if (img.lo < J.lo - 1e-9 || img.hi > J.hi + 1e-9) continue;
                // p must be the first return time of orb(c) to J
                bool first_return = true;
                for (int t = 1; t < p && first_return; ++t)
                    if (J.contains(corb[std::size_t(t)])) first_return = false;
                if (!first_return || !J.contains(corb[std::size_t(p)])) continue;
                res.levels.push_back({J, p, false});
                J_prev = J;
                p_prev = p;
                found = true;
                break;
            }
            if (found) break;
        }
        if (!found) break;
        if (2L * p_prev > p_max) { hit_pmax = true; break; }
    }
    res.saturated = hit_pmax;
    return res;
}

inline std::vector<PeriodicIntervalCycle> renormalization_cascade(const MapSpec& m,
                                                                  const CriticalPoint& c,
                                                                  int p_max) {
    return renormalization_cascade_ex(m, c, p_max).levels;
}

enum class OrbitTag {
    absorbed_by_homterval_cycle,
    tends_to_limit_cycle,
    absorbed_by_basic_set,
    feigenbaum_attractor,
    budget_exhausted
};

inline const char* to_string(OrbitTag t) {
    switch (t) {
        case OrbitTag::absorbed_by_homterval_cycle: return "absorbed_by_homterval_cycle";
        case OrbitTag::tends_to_limit_cycle: return "tends_to_limit_cycle";
        case OrbitTag::absorbed_by_basic_set: return "absorbed_by_basic_set";
        case OrbitTag::feigenbaum_attractor: return "feigenbaum_attractor";
        case OrbitTag::budget_exhausted: return "budget_exhausted";
    }
    return "?";
}

struct OrbitClass {
    OrbitTag tag = OrbitTag::budget_exhausted;
    std::optional<CycleEstimate> cycle;
    std::optional<PeriodicIntervalCycle> homterval;
    int cascade_depth = 0;
    Interval basic_witness;
    int witness_period = 1;
    long steps_used = 0;
};

/// Per-map data shared by orbit classification: detected homterval cycles
/// and the renormalization cascade of every extremum. Build once, reuse
/// across samples.
struct ClassifierContext {
    std::vector<PeriodicIntervalCycle> homtervals;
    std::vector<std::vector<Interval>> homterval_members; // orbit intervals
    std::vector<CascadeResult> cascades;                  // per extremum
    std::vector<CriticalPoint> cascade_extrema;
    int cascade_min = 5;
    int p_max = 4096;
};

inline ClassifierContext make_classifier_context(const MapSpec& m, int p_max = 4096,
                                                 int homterval_p_max = 8,
                                                 int cascade_min = 5) {
    ClassifierContext ctx;
    ctx.p_max = p_max;
    ctx.cascade_min = cascade_min;
    ctx.homtervals = detect_homtervals(m, homterval_p_max);
    for (const auto& h : ctx.homtervals) {
        std::vector<Interval> members;
        Interval cur = h.interval;
        for (int j = 0; j < h.period; ++j) {
            members.push_back(cur);
            cur = image(m, cur);
        }
        ctx.homterval_members.push_back(std::move(members));
    }
    for (const auto& c : m.critical_points) {
        if (c.kind != CritKind::extremum) continue;
        ctx.cascade_extrema.push_back(c);
        ctx.cascades.push_back(renormalization_cascade_ex(m, c, p_max));
    }
    return ctx;
}

/// Theorem-A style decision procedure. Priority: homterval absorption,
/// then limit-cycle convergence, then Feigenbaum-like cascade tracking,
/// else basic-set absorption with the deepest absorbing interval cycle as
/// witness.
inline OrbitClass classify_orbit(const MapSpec& m, double x, long budget,
                                 const ClassifierContext& ctx) {
    if (!m.in_domain(x)) throw std::domain_error("classify_orbit: x outside domain");
    OrbitClass oc;

    // (a) homterval-cycle absorption
    if (!ctx.homtervals.empty()) {
        long cap = budget;
        int hit = -1;
        with_family(m, [&](const auto& f) {
            double y = x;
            for (long k = 0; k <= cap; ++k) {
                for (std::size_t hI = 0; hI < ctx.homterval_members.size(); ++hI)
                    for (const auto& mem : ctx.homterval_members[hI])
                        if (mem.contains(y)) { hit = int(hI); break; }
                if (hit >= 0) { oc.steps_used = k; break; }
                y = f.eval(y);
                if (!m.in_domain(y)) y = m.clamp(y);
            }
        });
        if (hit >= 0) {
            oc.tag = OrbitTag::absorbed_by_homterval_cycle;
            oc.homterval = ctx.homtervals[std::size_t(hit)];
            return oc;
        }
    }

    // (b) limit cycle
    CycleSearch ps;
    ps.max_iter = budget;
    ps.p_max = ctx.p_max;
    CycleOutcome co = detect_cycle_ex(m, x, ps);
    oc.steps_used = co.steps_used;
    if (co.cycle && co.cycle->stability != CycleEstimate::Stability::repelling) {
        oc.tag = OrbitTag::tends_to_limit_cycle;
        oc.cycle = co.cycle;
        return oc;
    }

    // omega support samples for witness matching
    long burn = std::min<long>(budget / 4, 10000);
    long collect = std::min<long>(budget / 2, 8192);
    std::vector<double> osamp;
    osamp.reserve(std::size_t(collect));
    with_family(m, [&](const auto& f) {
        double y = x;
        for (long k = 0; k < burn; ++k) { y = f.eval(y); if (!m.in_domain(y)) y = m.clamp(y); }
        for (long k = 0; k < collect; ++k) {
            osamp.push_back(y);
            y = f.eval(y);
            if (!m.in_domain(y)) y = m.clamp(y);
        }
    });

    // (c)/(d): deepest cascade level whose cycle absorbs the omega samples
    int best_ext = -1, best_depth = -1;
    Interval witness = m.component_of(osamp.empty() ? x : osamp.back());
    int witness_period = 1;
    for (std::size_t e = 0; e < ctx.cascades.size(); ++e) {
        const auto& casc = ctx.cascades[e];
        for (std::size_t lvl = casc.levels.size(); lvl-- > 0;) {
            const auto& L = casc.levels[lvl];
            std::vector<Interval> members;
            Interval cur = L.interval;
            for (int j = 0; j < L.period && j < 1 << 14; ++j) {
                members.push_back(cur);
                cur = image(m, cur);
            }
            std::size_t inside = 0;
            for (double y : osamp) {
                for (const auto& mem : members)
                    if (mem.contains(y)) { ++inside; break; }
            }
            if (!osamp.empty() && double(inside) >= 0.99 * double(osamp.size())) {
                if (int(lvl) + 1 > best_depth) {
                    best_depth = int(lvl) + 1;
                    best_ext = int(e);
                    witness = L.interval;
                    witness_period = L.period;
                }
                break; // deeper levels first; stop at the deepest absorbing one
            }
        }
    }
    if (best_ext >= 0) {
        const auto& casc = ctx.cascades[std::size_t(best_ext)];
        oc.cascade_depth = int(casc.levels.size());
        if (int(casc.levels.size()) >= ctx.cascade_min && casc.saturated &&
            best_depth == int(casc.levels.size())) {
            oc.tag = OrbitTag::feigenbaum_attractor;
            oc.basic_witness = witness;
            oc.witness_period = witness_period;
            return oc;
        }
    }

    if (co.maybe_converging) {
        oc.tag = OrbitTag::budget_exhausted;
        return oc;
    }
    oc.tag = OrbitTag::absorbed_by_basic_set;
    oc.basic_witness = witness;
    oc.witness_period = witness_period;
    if (co.cycle) oc.cycle = co.cycle; // exact hit on a repelling cycle
    return oc;
}

/// Grid estimate of Lambda(f): the trivial part (limit-cycle realms and
/// homterval preimages) is removed sample-wise; the support collects the
/// orbit cells of the non-trivial samples.
struct LambdaEstimate {
    GridSet support;
    double measure_fraction = 0.0; // fraction of samples with non-trivial dynamics
    long samples = 0;
    long trivial = 0;
    long exhausted = 0;
};

inline LambdaEstimate lambda_set(const MapSpec& m, double grid_h, long samples,
                                 long budget, const ClassifierContext& ctx,
                                 std::uint64_t seed = 1, unsigned threads = 1) {
    LambdaEstimate est;
    est.support = GridSet::over(m, grid_h);
    est.samples = samples;
    Interval hull = m.hull();
    long collect_cap = std::min<long>(budget, 100000);

    std::vector<int> trivial(std::size_t(samples), 0);
    std::vector<GridSet> partial(threads <= 1 ? 1 : threads);
    for (auto& g : partial) g = GridSet::over(m, grid_h);
    std::vector<std::size_t> shard(std::size_t(samples), 0);
    unsigned nt = threads <= 1 ? 1 : threads;
    for (std::size_t i = 0; i < std::size_t(samples); ++i) shard[i] = i % nt;

    parallel_for(std::size_t(samples), nt, [&](std::size_t i) {
        auto rng = rng_stream(seed, i);
        std::uniform_real_distribution<double> jit(0.0, 1.0);
        double x = hull.lo + hull.length() * (double(i) + jit(rng)) / double(samples);
        if (!m.in_domain(x)) { trivial[i] = 1; return; }
        OrbitClass oc = classify_orbit(m, x, budget, ctx);
        if (oc.tag == OrbitTag::tends_to_limit_cycle ||
            oc.tag == OrbitTag::absorbed_by_homterval_cycle) {
            trivial[i] = 1;
            return;
        }
        if (oc.tag == OrbitTag::budget_exhausted) { trivial[i] = 2; return; }
        GridSet& g = partial[shard[i]];
        with_family(m, [&](const auto& f) {
            double y = x;
            for (long k = 0; k < collect_cap; ++k) {
                g.set_point(y);
                y = f.eval(y);
                if (!m.in_domain(y)) y = m.clamp(y);
            }
        });
    });
    for (const auto& g : partial) est.support.unite(g);
    for (int t : trivial) {
        if (t == 1) ++est.trivial;
        if (t == 2) ++est.exhausted;
    }
    est.measure_fraction = double(samples - est.trivial) / double(samples);
    return est;
}

/// Sensitivity scale of a local basic set: gamma such that intervals of
/// length >= tau grow past gamma after N(tau) steps, measured on sampled
/// intervals meeting the support.
struct SensitivityEstimate {
    double gamma = 0.0;
    std::vector<std::pair<double, int>> N_of_tau;
};

inline SensitivityEstimate estimate_sensitivity(const MapSpec& m, const GridSet& support,
                                                const std::vector<double>& taus,
                                                int n_max = 256, std::uint64_t seed = 9) {
    SensitivityEstimate se;
    auto rs = support.runs();
    if (rs.empty()) return se;
    auto rng = rng_stream(seed, 0);
    std::uniform_int_distribution<std::size_t> pick(0, rs.size() - 1);

    double gamma = kInf;
    std::vector<std::vector<double>> lengths; // per sample, per step
    std::vector<double> tau_of;
    for (double tau : taus) {
        for (int s = 0; s < 32; ++s) {
            auto [i, j] = rs[pick(rng)];
            double c0 = 0.5 * (support.cell_interval(i).lo + support.cell_interval(j).hi);
            Interval J(c0 - tau / 2, c0 + tau / 2);
            Interval hull = m.hull();
            J = Interval(std::max(J.lo, hull.lo), std::min(J.hi, hull.hi));
            if (J.length() <= 0) continue;
            std::vector<double> ls;
            Interval cur = J;
            for (int n = 1; n <= n_max; ++n) {
                cur = image(m, cur);
                ls.push_back(cur.length());
            }
            double tail = kInf;
            for (int n = n_max / 2; n < n_max; ++n) tail = std::min(tail, ls[std::size_t(n)]);
            gamma = std::min(gamma, tail);
            lengths.push_back(std::move(ls));
            tau_of.push_back(tau);
        }
    }
    if (!std::isfinite(gamma)) return se;
    se.gamma = 0.5 * gamma;
    for (double tau : taus) {
        int N = 0;
        for (std::size_t s = 0; s < lengths.size(); ++s) {
            if (tau_of[s] < tau) continue;
            int firstN = n_max;
            for (int n = n_max; n-- > 0;) {
                if (lengths[s][std::size_t(n)] <= se.gamma) { firstN = n + 1; break; }
                firstN = n;
            }
            N = std::max(N, firstN);
        }
        se.N_of_tau.emplace_back(tau, N);
    }
    return se;
}

} // namespace dynlab
