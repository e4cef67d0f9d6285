#pragma once

#include "nehari/fibering.hpp"
#include "nehari/functionals.hpp"

#include <span>
#include <vector>

namespace nehari {

struct BubbleSpec {
    double epsilon = 0.2;
    double cutoff_radius = 1.0;
    std::vector<double> center;  // empty means the origin
};

/// eps^{(N-2)/2} / (|x|^2 + eps^2)^{(N-2)/2}, centered at the origin.
double bubble(std::span<const double> x, double epsilon, int dim);
double bubble_radial(double r, double epsilon, int dim);

/// Radial cutoff: 1 on |x| <= rho_c/2, 0 on |x| >= rho_c, quintic smoothstep between.
double cutoff(std::span<const double> x, double rho_c);
double cutoff_radial(double r, double rho_c);

/// eta u_eps / ||eta u_eps||_{L^{2*}} sampled on the grid.
Field normalized_bubble(const GridPtr& grid, const BubbleSpec& spec, const ProblemParams& params);

/// pi N (N-2) (Gamma(N/2) / Gamma(N))^{2/N}
double sobolev_constant_closed_form(int dim);

/// b = eps^q, the coupling between the Kirchhoff coefficient and the bubble
/// scale under which the second-solution energy estimate is proved.
double coupled_kirchhoff_b(double epsilon, double q);

enum class PathRegion { U1, U2, OnNminus };
std::string to_string(PathRegion r);

/// Position of u relative to N-: U1 when t-(u/rho)/rho(u) > 1, U2 when < 1.
PathRegion u1_u2_membership(const Eigen::VectorXd& u, double lambda, const DiscreteProblem& problem);

struct PathCrossing {
    double t_cross = 0.0;  // gamma(t) = u0 + t l0 w
    double l0 = 0.0;
    Field field;           // gamma(t_cross) projected onto N-
};

/// Walks gamma(t) = u0 + t l0 w from U1 into U2 and bisects the crossing of N-.
PathCrossing find_path_crossing(const Field& u0, const Field& w, double l0_max, double lambda,
                                const DiscreteProblem& problem);

struct ProfilePoint {
    double r = 0.0;
    double energy = 0.0;
    NehariClass classification = NehariClass::NotOnNehari;
};

/// J_lambda(u0 + r w) for each r.
std::vector<ProfilePoint> energy_profile(const Field& u0, const Field& w, const std::vector<double>& radii,
                                         const DiscreteProblem& problem);

struct LevelCheck {
    double max_energy = 0.0;
    double argmax_r = 0.0;
    double c_lambda = 0.0;
    bool below = false;  // max_energy < c_lambda
};

LevelCheck path_level_check(const std::vector<ProfilePoint>& profile, double c_lambda_value);

}  // namespace nehari
