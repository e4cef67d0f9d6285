#include "nehari/nehari_solver.hpp"

#include "nehari/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace nehari {

std::string to_string(Branch b) { return b == Branch::Nplus ? "nplus" : "nminus"; }

Preconditioner::Preconditioner(const DiscreteProblem& problem, const SolverTolerances& tols)
    : problem_(&problem), tols_(tols) {
    const double a = problem.params.a;
    const auto n = static_cast<Eigen::Index>(problem.grid->size());
    Eigen::VectorXd diag = a * (Eigen::VectorXd(problem.forms.local.diagonal()) + problem.forms.fractional.diagonal());
    ridge_ = 1e-10 * diag.sum() / static_cast<double>(n);
    dense_ = problem.grid->size() <= tols.dense_limit;
    if (dense_) {
        Eigen::MatrixXd k = a * problem.forms.to_dense();
        k.diagonal().array() += ridge_;
        llt_.compute(k);
        if (llt_.info() != Eigen::Success) {
            throw Error(ErrorKind::InvalidArgument, "preconditioner matrix is not positive definite");
        }
    } else {
        inv_diag_ = (diag.array() + ridge_).inverse();
    }
}

Eigen::VectorXd Preconditioner::apply(const Eigen::VectorXd& g) const {
    if (dense_) return llt_.solve(g);
    const double a = problem_->params.a;
    auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a * problem_->forms.apply(v) + ridge_ * v; };
    Eigen::VectorXd x = Eigen::VectorXd::Zero(g.size());
    Eigen::VectorXd r = g;
    Eigen::VectorXd z = inv_diag_.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const double stop = tols_.cg_tolerance * g.norm();
    for (int it = 0; it < tols_.cg_max_iterations && r.norm() > stop; ++it) {
        const Eigen::VectorXd q = op(p);
        const double alpha = rz / p.dot(q);
        x += alpha * p;
        r -= alpha * q;
        z = inv_diag_.cwiseProduct(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    return x;
}

Eigen::VectorXd project_to_nehari(const Eigen::VectorXd& u, Branch branch, double lambda,
                                  const DiscreteProblem& problem, Nonlinearity part) {
    const auto sc = scalars(u, problem, part);
    if (!(sc.A > 0.0)) throw Error(ErrorKind::ZeroField, "cannot project the zero field");
    if (!(sc.C > 0.0)) throw Error(ErrorKind::ProjectionLost, "critical term vanishes along the ray");
    double t;
    if (sc.B > 0.0) {
        FiberRoots roots;
        try {
            roots = t_plus_minus(lambda, sc, problem.params);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NoRoots) throw Error(ErrorKind::ProjectionLost, "lambda >= lambda(u)");
            throw;
        }
        t = branch == Branch::Nplus ? roots.t_plus : roots.t_minus;
    } else {
        if (branch == Branch::Nplus) {
            throw Error(ErrorKind::NoNplusProjection, "a ray with int f|u|^p <= 0 does not meet N+");
        }
        t = t_nonpositive_branch(lambda, sc, problem.params);
    }
    return t * u;
}

Field project_to_nehari(const Field& u, Branch branch, double lambda, const DiscreteProblem& problem) {
    return Field(u.grid_ptr(), project_to_nehari(u.values(), branch, lambda, problem));
}

namespace {

struct State {
    Eigen::VectorXd u;
    FiberScalars sc;
    double energy = 0.0;
    double residual = 0.0;
    double scale = 0.0;  // aA + bA^theta + |lambda B| + C
};

State make_state(Eigen::VectorXd u, const DiscreteProblem& problem, Nonlinearity part) {
    State s;
    s.u = std::move(u);
    s.sc = scalars(s.u, problem, part);
    s.energy = energy_from_scalars(s.sc, problem.params);
    const auto d = fiber_derivatives(problem.params.lambda, s.sc, problem.params);
    s.residual = d.scale > 0.0 ? std::abs(d.first) / d.scale : std::numeric_limits<double>::infinity();
    s.scale = d.scale;
    return s;
}

bool recoverable(ErrorKind k) {
    return k == ErrorKind::ProjectionLost || k == ErrorKind::NoNplusProjection || k == ErrorKind::ZeroField ||
           k == ErrorKind::NoRoot;
}

Eigen::VectorXd project_with_rescue(const Eigen::VectorXd& u, Branch branch, const DiscreteProblem& problem,
                                    Nonlinearity part, int& rescues) {
    try {
        return project_to_nehari(u, branch, problem.params.lambda, problem, part);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::ProjectionLost) throw;
    }
    ++rescues;
    const double rho = std::sqrt(rho_squared(problem.forms, u));
    return project_to_nehari(Eigen::VectorXd(u / rho), branch, problem.params.lambda, problem, part);
}

double floor_at(const State& s, const DiscreteProblem& problem) {
    const double S = sobolev_quotient(s.u, problem.forms, problem.crit());
    return coercivity_floor(problem.params.lambda, problem.params, problem.f_norm, S);
}

}  // namespace

SolveResult minimize_on_branch(const Field& seed, Branch branch, const DiscreteProblem& problem,
                               const SolverTolerances& tols, Nonlinearity part) {
    if (seed.is_zero()) throw Error(ErrorKind::ZeroField, "solver seed is zero");
    SolveResult result;
    result.branch = branch;
    result.part = part;
    result.lambda = problem.params.lambda;

    const Preconditioner precond(problem, tols);
    State cur = make_state(project_with_rescue(seed.values(), branch, problem, part, result.rescues), problem, part);

    double alpha_prev = 0.5;
    double last_decrease = std::numeric_limits<double>::infinity();
    double gnorm = 0.0;
    double step = 0.0;
    for (int k = 0;; ++k) {
        const Eigen::VectorXd g = gradient(cur.u, problem, part);
        const Eigen::VectorXd d = precond.apply(g);
        const double gd = g.dot(d);
        const double rho = std::sqrt(cur.sc.A);
        gnorm = std::sqrt(std::max(gd, 0.0)) / (kirchhoff(cur.sc.A, problem.params) * rho);

        TraceEntry entry{cur.energy, cur.residual, gnorm, step, floor_at(cur, problem)};
        if (cur.energy < entry.coercivity_floor - 1e-12 * std::max(cur.scale, std::abs(entry.coercivity_floor))) {
            ++result.coercivity_violations;
        }
        result.trace.push_back(entry);
        result.iterations = k;

        const double e_scale = std::max(cur.scale, std::abs(cur.energy));
        if (gnorm <= tols.gradient && last_decrease <= tols.energy * e_scale) {
            result.converged = true;
            break;
        }
        if (k >= tols.max_iterations) {
            std::ostringstream msg;
            msg << "no convergence after " << k << " iterations (gradient norm " << gnorm << ")";
            throw Error(ErrorKind::MaxIterations, msg.str());
        }

        double alpha = std::min(1.0, 2.0 * alpha_prev);
        bool accepted = false;
        for (int bt = 0; bt < tols.max_backtracks; ++bt, alpha *= 0.5) {
            Eigen::VectorXd trial;
            try {
                trial = project_to_nehari(Eigen::VectorXd(cur.u - alpha * d), branch, problem.params.lambda, problem,
                                          part);
            } catch (const Error& e) {
                if (recoverable(e.kind())) continue;
                throw;
            }
            State next = make_state(std::move(trial), problem, part);
            if (!(next.residual <= tols.on_manifold)) continue;
            if (next.energy <= cur.energy - tols.armijo * alpha * gd + 1e-15 * e_scale) {
                last_decrease = cur.energy - next.energy;
                cur = std::move(next);
                alpha_prev = alpha;
                step = alpha;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (gnorm <= tols.gradient) {
                result.converged = true;
                break;
            }
            std::ostringstream msg;
            msg << "line search failed at iteration " << k << " (gradient norm " << gnorm << ")";
            throw Error(ErrorKind::LineSearchFailed, msg.str());
        }
    }

    result.field = Field(seed.grid_ptr(), cur.u);
    result.energy = cur.energy;
    result.nehari_residual = cur.residual;
    result.gradient_norm = gnorm;
    result.classification = classify(problem.params.lambda, cur.sc, problem.params);
    return result;
}

SolveResult minimize_nplus(const Field& seed, const DiscreteProblem& problem, const SolverTolerances& tols) {
    return minimize_on_branch(seed, Branch::Nplus, problem, tols);
}

NminusReport nminus_report(const SolveResult& result, const DiscreteProblem& problem, double S, const Field* u0) {
    NminusReport rep;
    rep.c_lambda = c_lambda(problem.params.lambda, problem.params, problem.f_norm, S);
    rep.margin = rep.c_lambda - result.energy;
    rep.below_threshold = result.energy < rep.c_lambda;
    rep.energy_positive = result.energy > 0.0;
    rep.rho = std::sqrt(rho_squared(problem.forms, result.field));
    rep.sobolev_used = std::min(S, sobolev_quotient(result.field, problem.forms, problem.crit()));
    rep.delta = nminus_norm_lower_bound(problem.params, rep.sobolev_used);
    if (u0) {
        const double r0 = std::sqrt(rho_squared(problem.forms, *u0));
        rep.distance_ratio = std::sqrt(rho_squared(problem.forms, result.field - *u0)) / r0;
        rep.distinct = *rep.distance_ratio > 1e-3;
    }
    return rep;
}

SolveResult minimize_nminus(const Field& seed, const DiscreteProblem& problem, double S,
                            const SolverTolerances& tols, bool require_below_threshold, const Field* u0,
                            NminusReport* report) {
    SolveResult result = minimize_on_branch(seed, Branch::Nminus, problem, tols);
    const NminusReport rep = nminus_report(result, problem, S, u0);
    if (report) *report = rep;
    if (require_below_threshold && !rep.below_threshold) {
        std::ostringstream msg;
        msg.precision(10);
        msg << "J(u1) = " << result.energy << " is not below c_lambda = " << rep.c_lambda
            << " (margin " << rep.margin << ")";
        throw Error(ErrorKind::EnergyAboveThreshold, msg.str());
    }
    return result;
}

SolveResult enforce_nonnegativity(const SolveResult& result, const DiscreteProblem& problem,
                                  const SolverTolerances& tols) {
    Field seed = result.field;
    if (!(scalars(seed, problem, Nonlinearity::PositivePart).C > 0.0)) {
        seed = Field(seed.grid_ptr(), seed.values().cwiseAbs());
    }
    SolveResult out = minimize_on_branch(seed, result.branch, problem, tols, Nonlinearity::PositivePart);
    const double bound = -1e-8 * out.field.max_abs();
    if (out.field.min_value() < bound) {
        std::ostringstream msg;
        msg << "min u = " << out.field.min_value() << " is below " << bound;
        throw Error(ErrorKind::NonnegativityFailed, msg.str());
    }
    const auto sc = scalars(out.field, problem);
    out.energy = energy_from_scalars(sc, problem.params);
    const auto d = fiber_derivatives(problem.params.lambda, sc, problem.params);
    out.nehari_residual = std::abs(d.first) / d.scale;
    out.classification = classify(problem.params.lambda, sc, problem.params);
    return out;
}

PalaisSmaleReport palais_smale_check(const std::vector<TraceEntry>& trace, double tol_gradient,
                                     std::optional<double> c_lambda_value) {
    PalaisSmaleReport rep;
    if (trace.empty()) return rep;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        const double slack = 1e-12 * std::max(std::abs(trace[k - 1].energy), std::abs(trace[k].energy));
        if (trace[k].energy > trace[k - 1].energy + slack) ++rep.monotone_violations;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (!(trace[k].gradient_norm > 0.0)) continue;
        const double x = static_cast<double>(k), y = std::log10(trace[k].gradient_norm);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) {
        const double den = n * sxx - sx * sx;
        if (den != 0.0) rep.residual_slope = (n * sxy - sx * sy) / den;
    }
    rep.final_energy = trace.back().energy;
    rep.final_gradient = trace.back().gradient_norm;
    rep.converged = rep.final_gradient <= tol_gradient;
    if (c_lambda_value) rep.c_lambda_margin = *c_lambda_value - rep.final_energy;
    return rep;
}

Field default_seed(const GridPtr& grid, std::uint64_t seed) {
    const int dim = grid->dim();
    Field bump = Field::from_function(grid, [&](std::span<const double> x) {
        double v = 1.0;
        for (int k = 0; k < dim; ++k) {
            v *= std::cos(0.5 * std::numbers::pi * (x[k] - grid->center()[k]) / grid->half_widths()[k]);
        }
        return v;
    });
    Field noise = random_smooth_field(grid, seed, 0);
    const double scale = noise.max_abs();
    if (scale > 0.0) bump.values() += (0.1 / scale) * noise.values();
    return bump;
}

}  // namespace nehari
