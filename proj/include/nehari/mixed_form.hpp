#pragma once

#include "nehari/grid.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <string>
#include <vector>

namespace nehari {

/// How the exterior interaction kappa(x) = int_{R^N \ Omega} |x-y|^{-N-2s} dy is evaluated.
///
/// BoundaryFaces integrates r_exit(w)^{-2s}/(2s) over directions, rewritten as
/// a sum of graded Gauss-Legendre integrals over the faces of the box. It is
/// exact up to quadrature error for any interior point.
///
/// ShellQuadrature sums the kernel over lattice cells of a shell box around
/// the domain, inside the ball |y-x| < tail_radius, and adds the closed-form
/// radial tail sigma_N / (2s tail_radius^{2s}) beyond that ball.
enum class KillingMethod { BoundaryFaces, ShellQuadrature };

struct MixedFormOptions {
    KillingMethod killing = KillingMethod::BoundaryFaces;
    int face_order = 8;            // Gauss-Legendre points per panel
    double shell_factor = 4.0;     // shell half-width L_k = shell_factor * half_width_k
    double tail_radius = 0.0;      // 0 selects min_k (L_k - half_width_k)
    int shell_refine = 2;          // shell lattice spacing = grid spacing / shell_refine
};

/// Surface measure of the unit sphere in R^N.
double unit_sphere_area(int dim);

/// Exterior-interaction coefficient at a point inside the grid's box.
double killing_coefficient(const Grid& grid, std::span<const double> x, double s,
                           const MixedFormOptions& options = {});

/// Matrix-free block-Toeplitz representation of the discrete Gagliardo form
///
///   u.K u = sum_{i != j} w_i w_j (u_i - u_j)^2 / |x_i - x_j|^{N+2s} + 2 sum_i w_i kappa_i u_i^2.
///
/// Same-node pairs are omitted. Pair weights depend only on the index offset,
/// so one table over offsets replaces the dense matrix.
class FractionalOperator {
public:
    FractionalOperator() = default;
    FractionalOperator(const Grid& grid, double s, Eigen::VectorXd killing);

    std::size_t size() const { return static_cast<std::size_t>(killing_.size()); }
    double s() const { return s_; }
    const Eigen::VectorXd& killing() const { return killing_; }

    /// w_i w_j / |x_i - x_j|^{N+2s}, zero for i == j.
    double pair_weight(std::size_t i, std::size_t j) const { return table_[base_[i] + pos_[j]]; }
    /// sum_{j != i} pair_weight(i, j)
    const Eigen::VectorXd& row_sums() const { return row_sums_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
    double quadratic(const Eigen::VectorXd& u) const { return u.dot(apply(u)); }
    double bilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const { return u.dot(apply(v)); }
    Eigen::VectorXd diagonal() const;
    Eigen::MatrixXd to_dense() const;

private:
    double s_ = 0.5;
    double cell_volume_ = 0.0;
    std::vector<double> table_;
    std::vector<std::size_t> base_;
    std::vector<std::size_t> pos_;
    Eigen::VectorXd killing_;
    Eigen::VectorXd row_sums_;
};

/// Five/seven/(2N+1)-point Dirichlet form scaled by the cell volume, with zero
/// ghost values one cell outside the interior nodes.
Eigen::SparseMatrix<double> assemble_local(const Grid& grid);

FractionalOperator assemble_fractional(const Grid& grid, double s, const MixedFormOptions& options = {});

/// Assembled quadratic forms of the mixed operator on one grid.
struct MixedForms {
    GridPtr grid;
    Eigen::SparseMatrix<double> local;
    FractionalOperator fractional;
    double s = 0.5;
    MixedFormOptions options;

    static MixedForms assemble(GridPtr grid, double s, const MixedFormOptions& options = {},
                               const std::string& cache_dir = "");

    const Eigen::VectorXd& killing() const { return fractional.killing(); }
    double tail_radius() const;

    /// (K_loc + K_frac) u
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return local * u + fractional.apply(u); }
    double local_quadratic(const Eigen::VectorXd& u) const { return u.dot(local * u); }
    double fractional_quadratic(const Eigen::VectorXd& u) const { return fractional.quadratic(u); }
    Eigen::MatrixXd to_dense() const;
};

double rho_squared(const MixedForms& forms, const Field& u);
double rho_squared(const MixedForms& forms, const Eigen::VectorXd& u);
double inner_rho(const MixedForms& forms, const Field& u, const Field& v);
double inner_rho(const MixedForms& forms, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Stable key for the assembly cache: FNV-1a over domain, s and killing options.
std::uint64_t forms_cache_key(const DomainDescriptor& domain, double s, const MixedFormOptions& options);
void save_killing_cache(const std::string& path, std::uint64_t key, const Eigen::VectorXd& killing);
bool load_killing_cache(const std::string& path, std::uint64_t key, Eigen::VectorXd& killing);

void dump_matrix_text(const Eigen::MatrixXd& m, std::ostream& os);

}  // namespace nehari
