#include "nehari/talenti.hpp"

#include "nehari/error.hpp"

#include <cmath>
#include <numbers>

namespace nehari {

namespace {

constexpr double kBandTol = 1e-9;

double norm2(std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return r2;
}

}  // namespace

double bubble_radial(double r, double epsilon, int dim) {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "bubble needs epsilon > 0");
    const double e = 0.5 * (dim - 2);
    return std::pow(epsilon, e) / std::pow(r * r + epsilon * epsilon, e);
}

double bubble(std::span<const double> x, double epsilon, int dim) {
    return bubble_radial(std::sqrt(norm2(x)), epsilon, dim);
}

double cutoff_radial(double r, double rho_c) {
    if (!(rho_c > 0.0)) throw Error(ErrorKind::InvalidArgument, "cutoff needs a positive radius");
    const double inner = 0.5 * rho_c;
    if (r <= inner) return 1.0;
    if (r >= rho_c) return 0.0;
    const double s = (r - inner) / (rho_c - inner);
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double cutoff(std::span<const double> x, double rho_c) { return cutoff_radial(std::sqrt(norm2(x)), rho_c); }

Field normalized_bubble(const GridPtr& grid, const BubbleSpec& spec, const ProblemParams& params) {
    const int dim = grid->dim();
    if (!(spec.epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "bubble needs epsilon > 0");
    if (spec.epsilon > spec.cutoff_radius) {
        throw Error(ErrorKind::InvalidArgument, "bubble epsilon exceeds the cutoff radius");
    }
    std::vector<double> center = spec.center.empty() ? std::vector<double>(dim, 0.0) : spec.center;
    if (static_cast<int>(center.size()) != dim) {
        throw Error(ErrorKind::InvalidArgument, "bubble center has the wrong dimension");
    }
    for (int k = 0; k < dim; ++k) {
        const double lo = grid->center()[k] - grid->half_widths()[k];
        const double hi = grid->center()[k] + grid->half_widths()[k];
        if (center[k] - spec.cutoff_radius < lo - 1e-12 || center[k] + spec.cutoff_radius > hi + 1e-12) {
            throw Error(ErrorKind::BubbleOutsideDomain, "cutoff ball leaves the domain");
        }
    }
    std::vector<double> y(dim);
    Field u = Field::from_function(grid, [&](std::span<const double> x) {
        for (int k = 0; k < dim; ++k) y[k] = x[k] - center[k];
        const double eta = cutoff(y, spec.cutoff_radius);
        return eta == 0.0 ? 0.0 : eta * bubble(y, spec.epsilon, dim);
    });
    const double crit = params.critical_exponent();
    double c = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) c += grid->weight(i) * std::pow(std::abs(u.values()[i]), crit);
    if (!(c > 0.0)) throw Error(ErrorKind::ZeroField, "bubble misses every grid node");
    u.values() /= std::pow(c, 1.0 / crit);
    return u;
}

double sobolev_constant_closed_form(int dim) {
    if (dim < 3) throw Error(ErrorKind::InvalidArgument, "Sobolev constant needs N >= 3");
    const double n = dim;
    return std::numbers::pi * n * (n - 2.0) * std::pow(std::tgamma(n / 2.0) / std::tgamma(n), 2.0 / n);
}

double coupled_kirchhoff_b(double epsilon, double q) {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "coupling needs epsilon > 0");
    return std::pow(epsilon, q);
}

std::string to_string(PathRegion r) {
    switch (r) {
    case PathRegion::U1: return "U1";
    case PathRegion::U2: return "U2";
    case PathRegion::OnNminus: return "OnNminus";
    }
    return "U1";
}

namespace {

// t-(v) for the ray through v; single-root branch when B <= 0.
double t_minus_of(const FiberScalars& sc, double lambda, const ProblemParams& params) {
    if (sc.B > 0.0) return t_plus_minus(lambda, sc, params).t_minus;
    return t_nonpositive_branch(lambda, sc, params);
}

}  // namespace

PathRegion u1_u2_membership(const Eigen::VectorXd& u, double lambda, const DiscreteProblem& problem) {
    if (u.size() == 0 || u.cwiseAbs().maxCoeff() == 0.0) return PathRegion::U1;
    const double rho = std::sqrt(rho_squared(problem.forms, u));
    const auto sc = scalars(Eigen::VectorXd(u / rho), problem);
    const double ratio = t_minus_of(sc, lambda, problem.params) / rho;
    if (ratio > 1.0 + kBandTol) return PathRegion::U1;
    if (ratio < 1.0 - kBandTol) return PathRegion::U2;
    return PathRegion::OnNminus;
}

PathCrossing find_path_crossing(const Field& u0, const Field& w, double l0_max, double lambda,
                                const DiscreteProblem& problem) {
    const Eigen::VectorXd& a = u0.values();
    const Eigen::VectorXd& d = w.values();
    if (u1_u2_membership(a, lambda, problem) != PathRegion::U1) {
        throw Error(ErrorKind::InvalidArgument, "path start is not in U1");
    }
    double l0 = std::min(1.0, l0_max);
    while (u1_u2_membership(a + l0 * d, lambda, problem) != PathRegion::U2) {
        if (l0 >= l0_max) throw Error(ErrorKind::NoU2Point, "path stays in U1 up to l0_max");
        l0 = std::min(2.0 * l0, l0_max);
    }

    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto region = u1_u2_membership(a + mid * l0 * d, lambda, problem);
        if (region == PathRegion::OnNminus) {
            lo = hi = mid;
            break;
        }
        (region == PathRegion::U1 ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    Eigen::VectorXd v = a + t * l0 * d;
    const auto sc = scalars(v, problem);
    const double tm = t_minus_of(sc, lambda, problem.params);

    PathCrossing out;
    out.t_cross = t;
    out.l0 = l0;
    out.field = Field(u0.grid_ptr(), tm * v);
    return out;
}

std::vector<ProfilePoint> energy_profile(const Field& u0, const Field& w, const std::vector<double>& radii,
                                         const DiscreteProblem& problem) {
    std::vector<ProfilePoint> out;
    out.reserve(radii.size());
    for (double r : radii) {
        const Eigen::VectorXd v = u0.values() + r * w.values();
        const auto sc = scalars(v, problem);
        out.push_back({r, energy_from_scalars(sc, problem.params), classify(problem.params.lambda, sc, problem.params)});
    }
    return out;
}

LevelCheck path_level_check(const std::vector<ProfilePoint>& profile, double c_lambda_value) {
    LevelCheck check;
    check.c_lambda = c_lambda_value;
    bool first = true;
    for (const auto& pt : profile) {
        if (first || pt.energy > check.max_energy) {
            check.max_energy = pt.energy;
            check.argmax_r = pt.r;
            first = false;
        }
    }
    check.below = !first && check.max_energy < c_lambda_value;
    return check;
}

}  // namespace nehari
