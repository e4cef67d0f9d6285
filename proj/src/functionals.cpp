#include "nehari/functionals.hpp"

#include "nehari/error.hpp"

#include <cmath>

namespace nehari {

namespace {

// sign(u)|u|^{q-1}; zero at u = 0 for q > 1.
inline double signed_power(double u, double q) {
    if (u == 0.0) return 0.0;
    return u > 0.0 ? std::pow(u, q - 1.0) : -std::pow(-u, q - 1.0);
}

inline double positive_power(double u, double q) { return u > 0.0 ? std::pow(u, q - 1.0) : 0.0; }

}  // namespace

DiscreteProblem DiscreteProblem::build(const ProblemParams& params, const MixedFormOptions& options,
                                       const std::string& cache_dir) {
    DiscreteProblem problem;
    problem.params = params;
    problem.grid = Grid::build(params.domain);
    problem.forms = MixedForms::assemble(problem.grid, params.s, options, cache_dir);
    problem.f = problem.grid->sample([&](std::span<const double> x) { return params.weight(x); });
    if (!problem.f.allFinite()) throw Error(ErrorKind::Config, "weight is not finite on the grid");
    problem.f_norm = weight_norm(*problem.grid, problem.f, params.p, params.critical_exponent());
    return problem;
}

DiscreteProblem DiscreteProblem::with_params(const ProblemParams& params) const {
    if (params.s != this->params.s || params.dim != this->params.dim) {
        throw Error(ErrorKind::InvalidArgument, "with_params cannot change s or the dimension");
    }
    DiscreteProblem problem = *this;
    problem.params = params;
    problem.f = grid->sample([&](std::span<const double> x) { return params.weight(x); });
    problem.f_norm = weight_norm(*grid, problem.f, params.p, params.critical_exponent());
    return problem;
}

double kirchhoff(double t, const ProblemParams& params) {
    if (params.theta == 1.0) return params.a + params.b;  // t^0 = 1, including t = 0
    return params.a + params.b * std::pow(t, params.theta - 1.0);
}

double kirchhoff_primitive(double t, const ProblemParams& params) {
    return params.a * t + params.b / params.theta * std::pow(t, params.theta);
}

double weight_norm(const Grid& grid, const Eigen::VectorXd& f, double p, double crit) {
    const double q = crit / (crit - p);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) sum += grid.weights()[i] * std::pow(std::abs(f[i]), q);
    return std::pow(sum, 1.0 / q);
}

FiberScalars scalars(const Eigen::VectorXd& u, const DiscreteProblem& problem, Nonlinearity part) {
    const auto& w = problem.grid->weights();
    const double p = problem.params.p;
    const double crit = problem.crit();
    FiberScalars sc;
    sc.A = rho_squared(problem.forms, u);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double v = part == Nonlinearity::Full ? std::abs(u[i]) : std::max(u[i], 0.0);
        if (v == 0.0) continue;
        sc.B += w[i] * problem.f[i] * std::pow(v, p);
        sc.C += w[i] * std::pow(v, crit);
    }
    return sc;
}

FiberScalars scalars(const Field& u, const DiscreteProblem& problem, Nonlinearity part) {
    return scalars(u.values(), problem, part);
}

double energy_from_scalars(const FiberScalars& sc, const ProblemParams& params) {
    const double crit = params.critical_exponent();
    return 0.5 * kirchhoff_primitive(sc.A, params) - params.lambda / params.p * sc.B - sc.C / crit;
}

EnergyBreakdown energy(const Eigen::VectorXd& u, const DiscreteProblem& problem, Nonlinearity part) {
    EnergyBreakdown e;
    const auto sc = scalars(u, problem, part);
    e.local_part = problem.forms.local_quadratic(u);
    e.fractional_part = problem.forms.fractional_quadratic(u);
    e.kirchhoff_energy = 0.5 * kirchhoff_primitive(sc.A, problem.params);
    e.concave_term = problem.params.lambda / problem.params.p * sc.B;
    e.critical_term = sc.C / problem.crit();
    e.total = e.kirchhoff_energy - e.concave_term - e.critical_term;
    return e;
}

EnergyBreakdown energy(const Field& u, const DiscreteProblem& problem, Nonlinearity part) {
    return energy(u.values(), problem, part);
}

Eigen::VectorXd gradient(const Eigen::VectorXd& u, const DiscreteProblem& problem, Nonlinearity part) {
    const auto& w = problem.grid->weights();
    const double p = problem.params.p;
    const double crit = problem.crit();
    const double lambda = problem.params.lambda;
    Eigen::VectorXd ku = problem.forms.apply(u);
    const double A = u.dot(ku);
    Eigen::VectorXd g = kirchhoff(A, problem.params) * ku;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double concave = part == Nonlinearity::Full ? signed_power(u[i], p) : positive_power(u[i], p);
        const double critical = part == Nonlinearity::Full ? signed_power(u[i], crit) : positive_power(u[i], crit);
        g[i] -= w[i] * (lambda * problem.f[i] * concave + critical);
    }
    return g;
}

Field gradient(const Field& u, const DiscreteProblem& problem) {
    return Field(u.grid_ptr(), gradient(u.values(), problem, Nonlinearity::Full));
}

Field positive_part_gradient(const Field& u, const DiscreteProblem& problem) {
    return Field(u.grid_ptr(), gradient(u.values(), problem, Nonlinearity::PositivePart));
}

double sobolev_quotient(const Eigen::VectorXd& u, const MixedForms& forms, double crit) {
    double c = 0.0;
    const auto& w = forms.grid->weights();
    for (Eigen::Index i = 0; i < u.size(); ++i) c += w[i] * std::pow(std::abs(u[i]), crit);
    if (!(c > 0.0)) throw Error(ErrorKind::ZeroField, "Sobolev quotient of the zero field");
    return rho_squared(forms, u) / std::pow(c, 2.0 / crit);
}

double sobolev_quotient(const Field& u, const MixedForms& forms, double crit) {
    return sobolev_quotient(u.values(), forms, crit);
}

double local_sobolev_quotient(const Eigen::VectorXd& u, const MixedForms& forms, double crit) {
    double c = 0.0;
    const auto& w = forms.grid->weights();
    for (Eigen::Index i = 0; i < u.size(); ++i) c += w[i] * std::pow(std::abs(u[i]), crit);
    if (!(c > 0.0)) throw Error(ErrorKind::ZeroField, "Sobolev quotient of the zero field");
    return forms.local_quadratic(u) / std::pow(c, 2.0 / crit);
}

}  // namespace nehari
