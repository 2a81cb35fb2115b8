#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dynlab/families.hpp"

namespace dynlab {

/// Parse a map definition. Schema (JSON):
///   { "family": "logistic" | "cubic", "params": { "a": <num> },
///     "eta": <num, optional>, "xi": <num, optional> }
/// or
///   { "family": "piecewise",
///     "pieces": [ { "from": <num>, "to": <num>, "coeffs": [c0, c1, ...] }, ... ],
///     "domain": [ [lo, hi], ... ]                  (optional),
///     "critical_points": [ { "location": <num>, "kind": "extremum"|"inflection",
///                            "exponent": <num>, "sign_left": +-1, "sign_right": +-1,
///                            "symmetric": <bool> }, ... ]   (optional),
///     "eta": ..., "xi": ... }
/// Coefficients are in ascending powers of (x - from).
inline MapSpec parse_map_json(const nlohmann::json& j) {
    double eta = j.value("eta", 0.0);
    double xi = j.value("xi", 0.0);
    std::string family = j.at("family").get<std::string>();

    if (family == "logistic") {
        double a = j.at("params").at("a").get<double>();
        return make_logistic(a, eta, xi);
    }
    if (family == "cubic") {
        double a = j.at("params").at("a").get<double>();
        return make_cubic(a, eta, xi);
    }
    if (family == "piecewise") {
        std::vector<double> bps;
        std::vector<std::vector<double>> coeffs;
        const auto& pieces = j.at("pieces");
        if (pieces.empty()) throw std::invalid_argument("piecewise: no pieces");
        for (const auto& p : pieces) {
            double from = p.at("from").get<double>();
            double to = p.at("to").get<double>();
            if (!bps.empty() && std::abs(bps.back() - from) > 1e-12)
                throw std::invalid_argument("piecewise: pieces not contiguous");
            if (bps.empty()) bps.push_back(from);
            bps.push_back(to);
            coeffs.push_back(p.at("coeffs").get<std::vector<double>>());
        }
        std::vector<CriticalPoint> crit;
        if (j.contains("critical_points")) {
            for (const auto& c : j.at("critical_points")) {
                CriticalPoint cp;
                cp.location = c.at("location").get<double>();
                std::string kind = c.value("kind", std::string("extremum"));
                cp.kind = kind == "inflection" ? CritKind::inflection : CritKind::extremum;
                cp.exponent = c.value("exponent", 2.0);
                cp.sign_left = c.value("sign_left", -1);
                cp.sign_right = c.value("sign_right", -1);
                cp.symmetric = c.value("symmetric", false);
                crit.push_back(cp);
            }
        }
        std::vector<Interval> domain;
        if (j.contains("domain"))
            for (const auto& d : j.at("domain"))
                domain.emplace_back(d.at(0).get<double>(), d.at(1).get<double>());
        return make_piecewise(std::move(bps), std::move(coeffs), std::move(crit),
                              eta, xi, std::move(domain));
    }
    throw std::invalid_argument("unknown family: " + family);
}

inline MapSpec load_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open map file: " + path);
    nlohmann::json j;
    in >> j;
    return parse_map_json(j);
}

} // namespace dynlab
