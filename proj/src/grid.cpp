#include "nehari/grid.hpp"

#include "nehari/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace nehari {

std::shared_ptr<const Grid> Grid::build(const DomainDescriptor& domain) {
    const int dim = domain.dim();
    if (dim < 1) throw Error(ErrorKind::EmptyDomain, "domain has no axes");
    if (domain.resolution.size() != static_cast<std::size_t>(dim)) {
        throw Error(ErrorKind::InvalidArgument, "resolution must list one count per axis");
    }
    if (!domain.center.empty() && domain.center.size() != static_cast<std::size_t>(dim)) {
        throw Error(ErrorKind::InvalidArgument, "center must list one coordinate per axis");
    }
    for (int k = 0; k < dim; ++k) {
        if (!(domain.half_widths[k] > 0.0)) {
            throw Error(ErrorKind::EmptyDomain, "half_width along axis " + std::to_string(k) + " is not positive");
        }
        if (domain.resolution[k] < 3) {
            throw Error(ErrorKind::InvalidArgument, "resolution must be >= 3 per axis");
        }
    }

    auto g = std::shared_ptr<Grid>(new Grid());
    g->domain_ = domain;
    g->counts_ = domain.resolution;
    g->half_widths_ = domain.half_widths;
    g->center_ = domain.center.empty() ? std::vector<double>(dim, 0.0) : domain.center;
    g->spacing_.resize(dim);
    g->cell_volume_ = 1.0;
    g->num_nodes_ = 1;
    for (int k = 0; k < dim; ++k) {
        g->spacing_[k] = 2.0 * g->half_widths_[k] / g->counts_[k];
        g->cell_volume_ *= g->spacing_[k];
        g->num_nodes_ *= static_cast<std::size_t>(g->counts_[k]);
    }

    g->coords_.resize(g->num_nodes_ * dim);
    for (std::size_t i = 0; i < g->num_nodes_; ++i) {
        const auto idx = g->multi_index(i);
        for (int k = 0; k < dim; ++k) {
            g->coords_[i * dim + k] =
                g->center_[k] - g->half_widths_[k] + (idx[k] + 0.5) * g->spacing_[k];
        }
    }
    g->weights_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g->num_nodes_), g->cell_volume_);
    return g;
}

std::vector<int> Grid::multi_index(std::size_t i) const {
    std::vector<int> idx(counts_.size());
    for (int k = dim() - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(i % counts_[k]);
        i /= counts_[k];
    }
    return idx;
}

std::size_t Grid::flat_index(std::span<const int> idx) const {
    std::size_t i = 0;
    for (int k = 0; k < dim(); ++k) i = i * counts_[k] + idx[k];
    return i;
}

std::size_t Grid::locate(std::span<const double> x) const {
    std::vector<int> idx(counts_.size());
    for (int k = 0; k < dim(); ++k) {
        const double rel = x[k] - (center_[k] - half_widths_[k]);
        if (rel <= 0.0 || rel >= 2.0 * half_widths_[k]) return npos;
        idx[k] = std::min(counts_[k] - 1, static_cast<int>(rel / spacing_[k]));
    }
    return flat_index(idx);
}

double Grid::integrate(const Eigen::VectorXd& values) const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) sum += weights_[i] * values[i];
    return sum;
}

double Grid::integrate(const std::function<double(std::span<const double>)>& expr) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < num_nodes_; ++i) sum += cell_volume_ * expr(node(i));
    return sum;
}

Eigen::VectorXd Grid::sample(const std::function<double(std::span<const double>)>& expr) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(num_nodes_));
    for (std::size_t i = 0; i < num_nodes_; ++i) v[static_cast<Eigen::Index>(i)] = expr(node(i));
    return v;
}

Field::Field(GridPtr grid) : grid_(std::move(grid)) {
    values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_->size()));
}

Field::Field(GridPtr grid, Eigen::VectorXd values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_->size()) {
        throw Error(ErrorKind::InvalidArgument, "field length does not match node count");
    }
    if (!values_.allFinite()) throw Error(ErrorKind::InvalidArgument, "field has non-finite values");
}

Field Field::from_function(GridPtr grid, const std::function<double(std::span<const double>)>& expr) {
    auto values = grid->sample(expr);
    return Field(std::move(grid), std::move(values));
}

double Field::at(std::span<const double> x) const {
    const auto i = grid_->locate(x);
    return i == Grid::npos ? 0.0 : values_[static_cast<Eigen::Index>(i)];
}

Field Field::operator+(const Field& other) const { return Field(grid_, values_ + other.values_); }
Field Field::operator-(const Field& other) const { return Field(grid_, values_ - other.values_); }
Field Field::operator-() const { return Field(grid_, -values_); }
Field Field::operator*(double c) const { return Field(grid_, c * values_); }

void write_field_csv(const Field& field, std::ostream& os) {
    const auto& g = field.grid();
    for (int k = 0; k < g.dim(); ++k) os << 'x' << (k + 1) << ',';
    os << "value\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (double xk : g.node(i)) os << xk << ',';
        os << field.values()[static_cast<Eigen::Index>(i)] << '\n';
    }
}

void write_field_csv(const Field& field, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
    write_field_csv(field, os);
}

Field read_field_csv(GridPtr grid, std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::Io, "field CSV is empty");
    const int dim = grid->dim();
    Eigen::VectorXd values(static_cast<Eigen::Index>(grid->size()));
    std::size_t row = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (row >= grid->size()) throw Error(ErrorKind::Io, "field CSV has more rows than grid nodes");
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cols;
        while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
        if (cols.size() != static_cast<std::size_t>(dim + 1)) {
            throw Error(ErrorKind::Io, "field CSV row " + std::to_string(row) + " has wrong column count");
        }
        const auto x = grid->node(row);
        for (int k = 0; k < dim; ++k) {
            if (std::abs(cols[k] - x[k]) > 1e-9 * (1.0 + std::abs(x[k]))) {
                throw Error(ErrorKind::Io, "field CSV row " + std::to_string(row) + " does not match grid node");
            }
        }
        values[static_cast<Eigen::Index>(row)] = cols[dim];
        ++row;
    }
    if (row != grid->size()) throw Error(ErrorKind::Io, "field CSV has fewer rows than grid nodes");
    return Field(std::move(grid), std::move(values));
}

Field read_field_csv(GridPtr grid, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::Io, "cannot read " + path);
    return read_field_csv(std::move(grid), is);
}

}  // namespace nehari
