#include "nehari/model_config.hpp"

#include "nehari/error.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>

namespace nehari {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::EmptyDomain: return "EmptyDomain";
    case ErrorKind::ZeroField: return "ZeroField";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::NoRoots: return "NoRoots";
    case ErrorKind::NonPositiveConcaveTerm: return "NonPositiveConcaveTerm";
    case ErrorKind::ProjectionLost: return "ProjectionLost";
    case ErrorKind::NoNminusProjection: return "NoNminusProjection";
    case ErrorKind::NoNplusProjection: return "NoNplusProjection";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::LineSearchFailed: return "LineSearchFailed";
    case ErrorKind::EnergyAboveThreshold: return "EnergyAboveThreshold";
    case ErrorKind::NonnegativityFailed: return "NonnegativityFailed";
    case ErrorKind::NoAdmissibleSample: return "NoAdmissibleSample";
    case ErrorKind::NoU2Point: return "NoU2Point";
    case ErrorKind::BubbleOutsideDomain: return "BubbleOutsideDomain";
    case ErrorKind::Io: return "IoError";
    }
    return "Unknown";
}

double DomainDescriptor::volume() const {
    double v = 1.0;
    for (double hw : half_widths) v *= 2.0 * hw;
    return v;
}

bool DomainDescriptor::contains(std::span<const double> x) const {
    for (std::size_t k = 0; k < half_widths.size(); ++k) {
        const double c = k < center.size() ? center[k] : 0.0;
        if (std::abs(x[k] - c) >= half_widths[k]) return false;
    }
    return true;
}

DomainDescriptor DomainDescriptor::cube(int dim, double half_width, int resolution) {
    DomainDescriptor d;
    d.center.assign(dim, 0.0);
    d.half_widths.assign(dim, half_width);
    d.resolution.assign(dim, resolution);
    return d;
}

double WeightDescriptor::operator()(std::span<const double> x) const {
    auto c = [&](std::size_t k) { return k < center.size() ? center[k] : 0.0; };
    switch (kind) {
    case WeightKind::Constant:
        return value;
    case WeightKind::SeparableCosine: {
        double prod = 1.0;
        for (std::size_t k = 0; k < x.size(); ++k) prod *= std::cos(frequency * (x[k] - c(k)));
        return offset + amplitude * prod;
    }
    case WeightKind::RadialStep: {
        double r2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - c(k)) * (x[k] - c(k));
        return r2 < radius * radius ? inner : outer;
    }
    case WeightKind::Tabulated: {
        if (points.empty()) throw Error(ErrorKind::InvalidArgument, "tabulated weight has no points");
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < points.size(); ++i) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) d2 += (points[i][k] - x[k]) * (points[i][k] - x[k]);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = i;
            }
        }
        return values[best];
    }
    }
    return 0.0;
}

WeightDescriptor WeightDescriptor::constant(double v) {
    WeightDescriptor w;
    w.kind = WeightKind::Constant;
    w.value = v;
    return w;
}

double critical_exponent(int dim) {
    if (dim < 3) throw Error(ErrorKind::InvalidArgument, "critical exponent needs N >= 3");
    return 2.0 * dim / (dim - 2.0);
}

double critical_exponent(const ProblemParams& params) { return critical_exponent(params.dim); }

double ProblemParams::critical_exponent() const { return nehari::critical_exponent(dim); }

ValidationReport validate(const ProblemParams& params) {
    ValidationReport report;
    auto fail = [&](const std::string& msg) { report.violations.push_back(msg); };
    auto str = [](double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    };

    if (params.dim < 3) {
        fail("dim must be >= 3 (got " + std::to_string(params.dim) + ")");
    }
    const double crit = params.dim >= 3 ? 2.0 * params.dim / (params.dim - 2.0)
                                        : std::numeric_limits<double>::infinity();
    if (!(params.a > 0.0)) fail("a must be > 0 (got " + str(params.a) + ")");
    if (!(params.b > 0.0)) fail("b must be > 0 (got " + str(params.b) + ")");
    if (!(params.lambda > 0.0)) fail("lambda must be > 0 (got " + str(params.lambda) + ")");
    if (!(params.s > 0.0 && params.s < 1.0)) fail("s must lie in (0,1) (got " + str(params.s) + ")");
    if (!(params.p > 1.0 && params.p < 2.0)) fail("p must lie in (1,2) (got " + str(params.p) + ")");
    if (!(params.theta >= 1.0)) fail("theta must be >= 1 (got " + str(params.theta) + ")");
    if (params.dim >= 3 && !(params.theta < crit / 2.0)) {
        fail("theta must be < 2*/2 = " + str(crit / 2.0) + " (got " + str(params.theta) + ")");
    }

    const auto& dom = params.domain;
    if (dom.dim() != params.dim) {
        fail("domain has " + std::to_string(dom.dim()) + " axes but dim = " + std::to_string(params.dim));
    }
    if (!dom.center.empty() && dom.center.size() != dom.half_widths.size()) {
        fail("domain center and half_widths differ in length");
    }
    if (dom.resolution.size() != dom.half_widths.size()) {
        fail("domain resolution and half_widths differ in length");
    }
    for (double hw : dom.half_widths) {
        if (!(hw > 0.0)) fail("domain half_width must be > 0 (got " + str(hw) + ")");
    }
    for (int r : dom.resolution) {
        if (r < 3) fail("domain resolution must be >= 3 per axis (got " + std::to_string(r) + ")");
    }
    if (params.weight.kind == WeightKind::Tabulated) {
        if (params.weight.points.empty() || params.weight.points.size() != params.weight.values.size()) {
            fail("tabulated weight needs matching points and values");
        }
        for (double v : params.weight.values) {
            if (!std::isfinite(v)) {
                fail("tabulated weight has a non-finite value");
                break;
            }
        }
    }

    const double n4s = params.dim + 4.0 * params.s;
    report.dimension_condition_holds = n4s < 6.0;
    if (report.dimension_condition_holds) {
        report.notes.push_back("N+4s = " + str(n4s) + " < 6 holds: two-solution regime applies");
    } else {
        report.notes.push_back("N+4s = " + str(n4s) + " >= 6: no guarantee for a second solution");
    }
    return report;
}

void require_valid(const ProblemParams& params) {
    const auto report = validate(params);
    if (!report.ok()) {
        std::string msg;
        for (const auto& v : report.violations) msg += (msg.empty() ? "" : "; ") + v;
        throw Error(ErrorKind::Config, msg);
    }
    const double crit = params.critical_exponent();
    if (!(params.p < 2.0 && 2.0 <= 2.0 * params.theta && 2.0 * params.theta < crit)) {
        throw Error(ErrorKind::Config, "exponent ordering p < 2 <= 2 theta < 2* violated");
    }
}

std::string to_string(WeightKind kind) {
    switch (kind) {
    case WeightKind::Constant: return "constant";
    case WeightKind::SeparableCosine: return "separable-cosine";
    case WeightKind::RadialStep: return "radial-step";
    case WeightKind::Tabulated: return "tabulated";
    }
    return "constant";
}

WeightKind weight_kind_from_string(const std::string& name) {
    if (name == "constant") return WeightKind::Constant;
    if (name == "separable-cosine") return WeightKind::SeparableCosine;
    if (name == "radial-step") return WeightKind::RadialStep;
    if (name == "tabulated") return WeightKind::Tabulated;
    throw Error(ErrorKind::Config, "unknown weight kind '" + name + "'");
}

}  // namespace nehari
