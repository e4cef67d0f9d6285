#pragma once

#include "nehari/fibering.hpp"
#include "nehari/functionals.hpp"

#include <Eigen/Cholesky>

#include <optional>
#include <string>
#include <vector>

namespace nehari {

enum class Branch { Nplus, Nminus };
std::string to_string(Branch b);

struct SolverTolerances {
    double gradient = 1e-6;        // on the relative preconditioned residual
    double energy = 1e-12;         // relative energy decrease
    double on_manifold = 1e-8;     // |m'(1)| / scale for accepted iterates
    int max_iterations = 2000;
    int max_backtracks = 60;
    double armijo = 1e-4;
    std::size_t dense_limit = 4096;  // largest system factored densely
    int cg_max_iterations = 500;
    double cg_tolerance = 1e-10;
};

struct TraceEntry {
    double energy = 0.0;
    double nehari_residual = 0.0;
    double gradient_norm = 0.0;
    double step = 0.0;
    double coercivity_floor = 0.0;
};

struct SolveResult {
    Field field;
    Branch branch = Branch::Nplus;
    Nonlinearity part = Nonlinearity::Full;
    double lambda = 0.0;
    double energy = 0.0;
    double nehari_residual = 0.0;  // |m'(1)| / scale
    double gradient_norm = 0.0;
    NehariClass classification = NehariClass::NotOnNehari;
    int iterations = 0;
    bool converged = false;
    int coercivity_violations = 0;
    int rescues = 0;
    std::vector<TraceEntry> trace;
};

/// Inverse of a (K_loc + K_frac) + ridge: dense Cholesky up to dense_limit
/// unknowns, Jacobi-preconditioned conjugate gradients beyond.
class Preconditioner {
public:
    Preconditioner(const DiscreteProblem& problem, const SolverTolerances& tols);
    Eigen::VectorXd apply(const Eigen::VectorXd& g) const;
    bool dense() const { return dense_; }
    double ridge() const { return ridge_; }

private:
    const DiscreteProblem* problem_;
    SolverTolerances tols_;
    bool dense_ = true;
    double ridge_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd inv_diag_;
};

/// t u on the requested branch of the Nehari set.
Eigen::VectorXd project_to_nehari(const Eigen::VectorXd& u, Branch branch, double lambda,
                                  const DiscreteProblem& problem, Nonlinearity part = Nonlinearity::Full);
Field project_to_nehari(const Field& u, Branch branch, double lambda, const DiscreteProblem& problem);

/// Projected preconditioned gradient descent on one branch of the Nehari set.
SolveResult minimize_on_branch(const Field& seed, Branch branch, const DiscreteProblem& problem,
                               const SolverTolerances& tols = {}, Nonlinearity part = Nonlinearity::Full);

SolveResult minimize_nplus(const Field& seed, const DiscreteProblem& problem, const SolverTolerances& tols = {});

struct NminusReport {
    double c_lambda = 0.0;
    double margin = 0.0;  // c_lambda - J(u1)
    bool below_threshold = false;
    double rho = 0.0;
    double delta = 0.0;  // lower bound on rho over N-
    double sobolev_used = 0.0;
    std::optional<double> distance_ratio;  // rho(u1 - u0) / rho(u0)
    bool distinct = true;
    bool energy_positive = false;
};

/// Diagnostics of an N- result. S is the Sobolev constant used in c_lambda.
NminusReport nminus_report(const SolveResult& result, const DiscreteProblem& problem, double S,
                           const Field* u0 = nullptr);

/// Minimizes on N- from a seed on or near it. With require_below_threshold the
/// call throws EnergyAboveThreshold when the converged energy is not below c_lambda.
SolveResult minimize_nminus(const Field& seed, const DiscreteProblem& problem, double S,
                            const SolverTolerances& tols = {}, bool require_below_threshold = true,
                            const Field* u0 = nullptr, NminusReport* report = nullptr);

/// Re-solves with the positive-part nonlinearity from the result's field and
/// checks min u >= -1e-8 max|u|.
SolveResult enforce_nonnegativity(const SolveResult& result, const DiscreteProblem& problem,
                                  const SolverTolerances& tols = {});

struct PalaisSmaleReport {
    int monotone_violations = 0;
    double residual_slope = 0.0;  // least-squares slope of log10 gradient norm per iteration
    double final_energy = 0.0;
    double final_gradient = 0.0;
    bool converged = false;
    std::optional<double> c_lambda_margin;
};

PalaisSmaleReport palais_smale_check(const std::vector<TraceEntry>& trace, double tol_gradient,
                                     std::optional<double> c_lambda_value = std::nullopt);

/// Positive cosine bump plus a small seeded perturbation.
Field default_seed(const GridPtr& grid, std::uint64_t seed);

}  // namespace nehari
