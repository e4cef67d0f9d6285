#include "nehari/json_io.hpp"

#include <cstdio>

namespace nehari {

using nlohmann::ordered_json;

namespace {

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

ordered_json to_json(const FiberScalars& sc) { return {{"A", sc.A}, {"B", sc.B}, {"C", sc.C}}; }

ordered_json to_json(const EnergyBreakdown& e) {
    return {{"local_part", e.local_part},         {"fractional_part", e.fractional_part},
            {"kirchhoff_energy", e.kirchhoff_energy}, {"concave_term", e.concave_term},
            {"critical_term", e.critical_term},   {"total", e.total}};
}

ordered_json to_json(const FiberingReport& r) {
    return {{"scalars", to_json(r.scalars)},
            {"lambda", r.lambda},
            {"t_star", opt(r.t_star)},
            {"t_root", r.t_root},
            {"phi_max", r.phi_max},
            {"lambda_u", opt(r.lambda_u)},
            {"t_plus", opt(r.t_plus)},
            {"t_minus", opt(r.t_minus)},
            {"classification", to_string(r.classification)},
            {"branch", r.nonpositive_branch ? "single-root (B <= 0)" : "two-root (B > 0)"}};
}

ordered_json to_json(const ValidationReport& r) {
    return {{"ok", r.ok()},
            {"violations", r.violations},
            {"notes", r.notes},
            {"dimension_condition_holds", r.dimension_condition_holds}};
}

ordered_json to_json(const NminusReport& r) {
    return {{"c_lambda", r.c_lambda},
            {"margin", r.margin},
            {"below_threshold", r.below_threshold},
            {"rho", r.rho},
            {"delta", r.delta},
            {"sobolev_used", r.sobolev_used},
            {"distance_ratio", opt(r.distance_ratio)},
            {"distinct", r.distinct},
            {"energy_positive", r.energy_positive}};
}

ordered_json to_json(const PalaisSmaleReport& r) {
    return {{"monotone_violations", r.monotone_violations},
            {"residual_slope", r.residual_slope},
            {"final_energy", r.final_energy},
            {"final_gradient", r.final_gradient},
            {"converged", r.converged},
            {"c_lambda_margin", opt(r.c_lambda_margin)}};
}

ordered_json to_json(const SolveResult& r) {
    ordered_json trace = ordered_json::array();
    for (const auto& t : r.trace) {
        trace.push_back({t.energy, t.nehari_residual, t.gradient_norm, t.step, t.coercivity_floor});
    }
    return {{"branch", to_string(r.branch)},
            {"nonlinearity", r.part == Nonlinearity::Full ? "full" : "positive-part"},
            {"lambda", r.lambda},
            {"energy", r.energy},
            {"nehari_residual", r.nehari_residual},
            {"gradient_norm", r.gradient_norm},
            {"classification", to_string(r.classification)},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"rescues", r.rescues},
            {"coercivity_violations", r.coercivity_violations},
            {"min_value", r.field.min_value()},
            {"max_abs", r.field.max_abs()},
            {"trace_columns", {"energy", "nehari_residual", "gradient_norm", "step", "coercivity_floor"}},
            {"trace", trace}};
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nehari
