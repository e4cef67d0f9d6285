#pragma once

#include "nehari/functionals.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace nehari {

// Scalar analytics of the fibering map t -> J(tu). Every function depends on u
// only through its FiberScalars (A, B, C).
//
//   Phi(t) = a t^{2-p} A + b t^{2theta-p} A^theta - t^{2*-p} C       (tu on Nehari iff Phi(t) = lambda B)
//   h(t)   = a(2-p) t^2 A + b(2theta-p) t^{2theta} A^theta - (2*-p) t^{2*} C = t^{1+p} Phi'(t)
//   m(t)   = h(t) / t^2

double phi(double t, const FiberScalars& sc, const ProblemParams& params);
double h(double t, const FiberScalars& sc, const ProblemParams& params);
double m(double t, const FiberScalars& sc, const ProblemParams& params);
/// d/dt m(t) = b(2theta-2)(2theta-p) t^{2theta-3} A^theta - (2*-p)(2*-2) t^{2*-3} C
double m_derivative(double t, const FiberScalars& sc, const ProblemParams& params);

/// Critical point of m; nullopt when theta == 1 (m is then strictly decreasing).
std::optional<double> t_star(const FiberScalars& sc, const ProblemParams& params);

/// Unique positive zero of m, i.e. the argmax of Phi.
double t_root(const FiberScalars& sc, const ProblemParams& params);

/// Generalized Rayleigh quotient: the lambda at which the fiber of u degenerates.
double lambda_of_u(const FiberScalars& sc, const ProblemParams& params);

struct FiberRoots {
    double t_plus = 0.0;
    double t_minus = 0.0;
    bool tangent = false;  // lambda == lambda(u): both roots coincide with t_root
};

/// The two solutions of Phi(t) = lambda B for B > 0 and lambda <= lambda(u).
FiberRoots t_plus_minus(double lambda, const FiberScalars& sc, const ProblemParams& params);

/// For B <= 0 the ray through u meets the Nehari set exactly once, on the
/// decreasing side of Phi, so the point is a local maximum of the fiber.
double t_nonpositive_branch(double lambda, const FiberScalars& sc, const ProblemParams& params);

/// J(tu) expressed through the scalars of u.
double fiber_energy(double t, double lambda, const FiberScalars& sc, const ProblemParams& params);

enum class NehariClass { Nplus, Nminus, Nzero, NotOnNehari };
std::string to_string(NehariClass c);

struct FiberDerivatives {
    double first = 0.0;   // m'_{lambda,u}(1)
    double second = 0.0;  // m''_{lambda,u}(1)
    double scale = 0.0;   // aA + bA^theta + |lambda B| + C
};

FiberDerivatives fiber_derivatives(double lambda, const FiberScalars& sc, const ProblemParams& params);
NehariClass classify(double lambda, const FiberScalars& sc, const ProblemParams& params, double tol = 1e-9);

struct FiberingReport {
    FiberScalars scalars;
    double lambda = 0.0;
    std::optional<double> t_star;
    double t_root = 0.0;
    double phi_max = 0.0;
    std::optional<double> lambda_u;
    std::optional<double> t_plus;
    std::optional<double> t_minus;
    NehariClass classification = NehariClass::NotOnNehari;
    bool nonpositive_branch = false;  // B <= 0
};

FiberingReport fiber_report(double lambda, const FiberScalars& sc, const ProblemParams& params);

// ---- explicit parameter thresholds -------------------------------------------------

double lambda_1(const ProblemParams& params, double norm_f, double S);
/// Compactness level c_lambda; may be negative for large lambda.
double c_lambda(double lambda, const ProblemParams& params, double norm_f, double S);
/// (1/N)(a S)^{N/2}, the lambda -> 0 limit of c_lambda.
double c_lambda_limit(const ProblemParams& params, double S);
/// The lambda at which c_lambda vanishes.
double lambda_2(const ProblemParams& params, double norm_f, double S);

struct Thresholds {
    double lambda_1 = 0.0;
    double lambda_2 = 0.0;
    double lambda_0 = 0.0;  // min(lambda_1, lambda_2)
};
Thresholds thresholds(const ProblemParams& params, double norm_f, double S);

/// min over t > 0 of (1/2theta - 1/2*) b t^{2theta} - lambda (1/p - 1/2*) S^{-p/2} ||f|| t^p.
/// Energies on the Nehari set stay above this value.
double coercivity_floor(double lambda, const ProblemParams& params, double norm_f, double S);

/// Lower bound on rho over the N- set: (b(2theta-p) S^{2*/2} / (2*-p))^{1/(2*-2theta)}.
double nminus_norm_lower_bound(const ProblemParams& params, double S);

// ---- extremal parameter estimate -----------------------------------------------------

using ScalarSampler = std::function<FiberScalars(std::size_t index)>;

struct ExtremalEstimate {
    double estimate = 0.0;
    std::size_t argmin = 0;
    std::size_t admissible = 0;
};

/// Running minimum of lambda(u) over samples with B > 0; an upper bound on the
/// discrete extremal value.
ExtremalEstimate extremal_lambda_estimate(const ScalarSampler& sampler, std::size_t count,
                                          const ProblemParams& params);

/// Random smooth field number `index` of a seeded family: low-frequency sine
/// modes with Gaussian coefficients. Sample i depends only on (seed, i).
Field random_smooth_field(const GridPtr& grid, std::uint64_t seed, std::size_t index);

ScalarSampler field_sampler(const DiscreteProblem& problem, std::uint64_t seed);

}  // namespace nehari
