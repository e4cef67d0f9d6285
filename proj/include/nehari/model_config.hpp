#pragma once

#include <span>
#include <string>
#include <vector>

namespace nehari {

enum class DomainKind { IntervalBox };

/// Axis-aligned box standing in for the bounded domain.
struct DomainDescriptor {
    DomainKind kind = DomainKind::IntervalBox;
    std::vector<double> center;
    std::vector<double> half_widths;
    std::vector<int> resolution;  // cells (= nodes) per axis

    int dim() const { return static_cast<int>(half_widths.size()); }
    double volume() const;
    bool contains(std::span<const double> x) const;  // open box

    static DomainDescriptor cube(int dim, double half_width, int resolution);
};

enum class WeightKind { Constant, SeparableCosine, RadialStep, Tabulated };

/// The sign-changing weight f.
///
///   constant:         f = value
///   separable-cosine: f = offset + amplitude * prod_k cos(frequency * (x_k - c_k))
///   radial-step:      f = inner for |x - c| < radius, outer otherwise
///   tabulated:        nearest tabulated point wins
struct WeightDescriptor {
    WeightKind kind = WeightKind::Constant;
    double value = 1.0;
    double offset = 0.0;
    double amplitude = 1.0;
    double frequency = 1.0;
    double inner = 1.0;
    double outer = -1.0;
    double radius = 0.5;
    std::vector<double> center;               // empty means origin
    std::vector<std::vector<double>> points;  // tabulated coordinates
    std::vector<double> values;               // tabulated values

    double operator()(std::span<const double> x) const;

    static WeightDescriptor constant(double v);
};

struct ProblemParams {
    double a = 1.0;
    double b = 1.0;
    double theta = 2.0;
    double p = 1.5;
    double s = 0.5;
    int dim = 3;
    double lambda = 0.1;
    DomainDescriptor domain;
    WeightDescriptor weight;

    double critical_exponent() const;
};

double critical_exponent(const ProblemParams& params);
double critical_exponent(int dim);

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> notes;
    bool dimension_condition_holds = false;  // N + 4s < 6

    bool ok() const { return violations.empty(); }
};

ValidationReport validate(const ProblemParams& params);

/// Throws Error(Config) listing every violation when params are not admissible,
/// then asserts the exponent ordering p < 2 <= 2 theta < 2*.
void require_valid(const ProblemParams& params);

std::string to_string(WeightKind kind);
WeightKind weight_kind_from_string(const std::string& name);

}  // namespace nehari
