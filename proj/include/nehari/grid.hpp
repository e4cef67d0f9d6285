#pragma once

#include "nehari/model_config.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nehari {

/// Tensor-product midpoint grid of the cells of a box. Every node is strictly
/// interior, so the zero exterior condition holds without boundary bookkeeping.
/// Node order is row-major: the last axis varies fastest.
class Grid {
public:
    static std::shared_ptr<const Grid> build(const DomainDescriptor& domain);

    int dim() const { return static_cast<int>(counts_.size()); }
    std::size_t size() const { return num_nodes_; }
    const std::vector<int>& counts() const { return counts_; }
    const std::vector<double>& spacing() const { return spacing_; }
    const std::vector<double>& center() const { return center_; }
    const std::vector<double>& half_widths() const { return half_widths_; }
    const DomainDescriptor& domain() const { return domain_; }

    std::span<const double> node(std::size_t i) const {
        return {coords_.data() + i * counts_.size(), counts_.size()};
    }
    double weight(std::size_t) const { return cell_volume_; }
    double cell_volume() const { return cell_volume_; }
    const Eigen::VectorXd& weights() const { return weights_; }

    /// Multi-index of node i (one entry per axis).
    std::vector<int> multi_index(std::size_t i) const;
    std::size_t flat_index(std::span<const int> idx) const;

    /// Index of the cell containing x, or npos when x lies outside the open box.
    std::size_t locate(std::span<const double> x) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Sum_i w_i * values_i.
    double integrate(const Eigen::VectorXd& values) const;
    double integrate(const std::function<double(std::span<const double>)>& expr) const;

    Eigen::VectorXd sample(const std::function<double(std::span<const double>)>& expr) const;

private:
    Grid() = default;

    DomainDescriptor domain_;
    std::vector<int> counts_;
    std::vector<double> spacing_;
    std::vector<double> center_;
    std::vector<double> half_widths_;
    std::vector<double> coords_;
    Eigen::VectorXd weights_;
    std::size_t num_nodes_ = 0;
    double cell_volume_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

/// A grid function. Values live on interior nodes; the extension outside the
/// domain is identically zero.
class Field {
public:
    Field() = default;
    explicit Field(GridPtr grid);
    Field(GridPtr grid, Eigen::VectorXd values);

    static Field from_function(GridPtr grid, const std::function<double(std::span<const double>)>& expr);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

    /// Cell-constant evaluation; exactly 0 outside the domain.
    double at(std::span<const double> x) const;

    double max_abs() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }
    double min_value() const { return values_.size() ? values_.minCoeff() : 0.0; }
    bool is_zero() const { return values_.size() == 0 || values_.cwiseAbs().maxCoeff() == 0.0; }

    Field operator+(const Field& other) const;
    Field operator-(const Field& other) const;
    Field operator-() const;
    Field operator*(double c) const;
    friend Field operator*(double c, const Field& f) { return f * c; }

private:
    GridPtr grid_;
    Eigen::VectorXd values_;
};

/// CSV with header x1..xN,value and one row per node in node order.
void write_field_csv(const Field& field, std::ostream& os);
void write_field_csv(const Field& field, const std::string& path);
Field read_field_csv(GridPtr grid, std::istream& is);
Field read_field_csv(GridPtr grid, const std::string& path);

}  // namespace nehari
