#pragma once

#include "nehari/grid.hpp"
#include "nehari/mixed_form.hpp"
#include "nehari/model_config.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace nehari {

/// (A, B, C) = (rho(u)^2, int f|u|^p, int |u|^{2*}); fixes the fibering map of u.
struct FiberScalars {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;

    /// Scalars of c*u.
    FiberScalars scaled(double c, double p, double crit) const {
        return {c * c * A, std::pow(std::abs(c), p) * B, std::pow(std::abs(c), crit) * C};
    }
};

struct EnergyBreakdown {
    double local_part = 0.0;       // discrete int |grad u|^2
    double fractional_part = 0.0;  // discrete [u]_s^2
    double kirchhoff_energy = 0.0; // M^(A) / 2
    double concave_term = 0.0;     // lambda B / p
    double critical_term = 0.0;    // C / 2*
    double total = 0.0;
};

/// Which nonlinearity enters the functional: |u| (the energy J) or u+ (the
/// positive-part energy used to force nonnegative minimizers).
enum class Nonlinearity { Full, PositivePart };

/// Everything needed to evaluate the discrete functional: parameters, grid,
/// assembled forms, the weight sampled at nodes and its L^{2*/(2*-p)} norm.
struct DiscreteProblem {
    ProblemParams params;
    GridPtr grid;
    MixedForms forms;
    Eigen::VectorXd f;
    double f_norm = 0.0;

    static DiscreteProblem build(const ProblemParams& params, const MixedFormOptions& options = {},
                                 const std::string& cache_dir = "");
    /// Same grid and forms, different parameters (lambda, a, b, ...). s and the domain must match.
    DiscreteProblem with_params(const ProblemParams& params) const;

    double crit() const { return params.critical_exponent(); }
};

double kirchhoff(double t, const ProblemParams& params);
double kirchhoff_primitive(double t, const ProblemParams& params);

/// ||f||_{L^{2*/(2*-p)}} under grid quadrature.
double weight_norm(const Grid& grid, const Eigen::VectorXd& f, double p, double crit);

FiberScalars scalars(const Eigen::VectorXd& u, const DiscreteProblem& problem,
                     Nonlinearity part = Nonlinearity::Full);
FiberScalars scalars(const Field& u, const DiscreteProblem& problem, Nonlinearity part = Nonlinearity::Full);

EnergyBreakdown energy(const Eigen::VectorXd& u, const DiscreteProblem& problem,
                       Nonlinearity part = Nonlinearity::Full);
EnergyBreakdown energy(const Field& u, const DiscreteProblem& problem, Nonlinearity part = Nonlinearity::Full);

/// Energy from precomputed scalars, (a/2)A + (b/2 theta)A^theta - (lambda/p)B - C/2*.
double energy_from_scalars(const FiberScalars& sc, const ProblemParams& params);

/// Nodal weak residual g_i = M(A) ((K_loc+K_frac)u)_i - w_i (lambda f_i |u_i|^{p-2}u_i + |u_i|^{2*-2}u_i).
/// It is the Euclidean gradient of the discrete energy.
Eigen::VectorXd gradient(const Eigen::VectorXd& u, const DiscreteProblem& problem,
                         Nonlinearity part = Nonlinearity::Full);
Field gradient(const Field& u, const DiscreteProblem& problem);
Field positive_part_gradient(const Field& u, const DiscreteProblem& problem);

/// rho(u)^2 / (int |u|^{2*})^{2/2*}.
double sobolev_quotient(const Eigen::VectorXd& u, const MixedForms& forms, double crit);
double sobolev_quotient(const Field& u, const MixedForms& forms, double crit);
/// Same quotient with the local form only.
double local_sobolev_quotient(const Eigen::VectorXd& u, const MixedForms& forms, double crit);

}  // namespace nehari
