#pragma once

#include <cstdint>
#include <cstdio>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dynlab {

/// Default numeric tolerances used across the library. Every analysis
/// routine takes what it needs as explicit parameters; these are the
/// shared defaults.
struct Tolerances {
    double eps_num = 1e-12;   // generic comparison slack
    double tol_cycle = 1e-10; // |f^p(z) - z| for accepted cycles
    double tol_mult = 1e-6;   // band around |multiplier| = 1
    double h_max = 1e-9;      // resolution of chain maximality probes
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Format a double with 17 significant digits (lossless round-trip).
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic per-task substream: independent of how work is sharded
/// across threads.
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t task) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(task + 0x517cc1b727220a95ULL)));
}

/// Index-sharded parallel loop. fn(i) must write only to slot i of any
/// shared output so the result is independent of the schedule.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t nt = std::min<std::size_t>(threads, n);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += nt) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline unsigned default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n ? n : 1;
}

} // namespace dynlab
