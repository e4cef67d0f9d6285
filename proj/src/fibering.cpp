#include "nehari/fibering.hpp"

#include "nehari/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace nehari {

namespace {

constexpr double kTangencyTol = 1e-10;

// Plain bisection; f(lo) and f(hi) must have opposite signs. Runs to the
// resolution of double precision.
template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double power_theta(double A, const ProblemParams& params) { return std::pow(A, params.theta); }

void require_nondegenerate(const FiberScalars& sc) {
    if (!(sc.A > 0.0)) throw Error(ErrorKind::ZeroField, "rho(u)^2 vanishes");
    if (!(sc.C > 0.0)) throw Error(ErrorKind::NoRoot, "int |u|^{2*} vanishes; the fibering map has no peak");
}

}  // namespace

double phi(double t, const FiberScalars& sc, const ProblemParams& params) {
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "phi needs t > 0");
    const double p = params.p, crit = params.critical_exponent();
    return params.a * std::pow(t, 2.0 - p) * sc.A +
           params.b * std::pow(t, 2.0 * params.theta - p) * power_theta(sc.A, params) -
           std::pow(t, crit - p) * sc.C;
}

double h(double t, const FiberScalars& sc, const ProblemParams& params) {
    const double p = params.p, crit = params.critical_exponent(), th = params.theta;
    return params.a * (2.0 - p) * t * t * sc.A +
           params.b * (2.0 * th - p) * std::pow(t, 2.0 * th) * power_theta(sc.A, params) -
           (crit - p) * std::pow(t, crit) * sc.C;
}

double m(double t, const FiberScalars& sc, const ProblemParams& params) {
    const double p = params.p, crit = params.critical_exponent(), th = params.theta;
    return params.a * (2.0 - p) * sc.A +
           params.b * (2.0 * th - p) * std::pow(t, 2.0 * th - 2.0) * power_theta(sc.A, params) -
           (crit - p) * std::pow(t, crit - 2.0) * sc.C;
}

double m_derivative(double t, const FiberScalars& sc, const ProblemParams& params) {
    const double p = params.p, crit = params.critical_exponent(), th = params.theta;
    const double local = th == 1.0 ? 0.0
                                   : params.b * (2.0 * th - 2.0) * (2.0 * th - p) * std::pow(t, 2.0 * th - 3.0) *
                                         power_theta(sc.A, params);
    return local - (crit - p) * (crit - 2.0) * std::pow(t, crit - 3.0) * sc.C;
}

std::optional<double> t_star(const FiberScalars& sc, const ProblemParams& params) {
    if (!(sc.C > 0.0)) throw Error(ErrorKind::NoRoot, "t_star needs int |u|^{2*} > 0");
    if (params.theta == 1.0) return std::nullopt;
    const double p = params.p, crit = params.critical_exponent(), th = params.theta;
    const double num = params.b * (2.0 * th - 2.0) * (2.0 * th - p) * power_theta(sc.A, params);
    const double den = (crit - p) * (crit - 2.0) * sc.C;
    return std::pow(num / den, 1.0 / (crit - 2.0 * th));
}

double t_root(const FiberScalars& sc, const ProblemParams& params) {
    require_nondegenerate(sc);
    auto mf = [&](double t) { return m(t, sc, params); };
    double lo;
    if (auto ts = t_star(sc, params)) {
        lo = *ts;
    } else {
        // m is decreasing from m(0+) = (a+b)(2-p)A > 0.
        lo = std::pow(sc.A / sc.C, 1.0 / (params.critical_exponent() - 2.0));
        while (mf(lo) <= 0.0) lo *= 0.5;
    }
    double hi = 2.0 * lo;
    while (mf(hi) >= 0.0) hi *= 2.0;
    return bisect(mf, lo, hi);
}

double lambda_of_u(const FiberScalars& sc, const ProblemParams& params) {
    if (!(sc.B > 0.0)) {
        throw Error(ErrorKind::NonPositiveConcaveTerm, "lambda(u) is undefined when int f|u|^p <= 0");
    }
    const double t = t_root(sc, params);
    const double p = params.p, crit = params.critical_exponent(), th = params.theta;
    const double num = params.a * (crit - 2.0) * std::pow(t, 2.0 - p) * sc.A +
                       params.b * (crit - 2.0 * th) * std::pow(t, 2.0 * th - p) * power_theta(sc.A, params);
    return num / ((crit - p) * sc.B);
}

FiberRoots t_plus_minus(double lambda, const FiberScalars& sc, const ProblemParams& params) {
    if (!(sc.B > 0.0)) {
        throw Error(ErrorKind::NonPositiveConcaveTerm, "two-root projection needs int f|u|^p > 0");
    }
    const double tr = t_root(sc, params);
    const double lu = lambda_of_u(sc, params);
    if (lambda > lu * (1.0 + kTangencyTol)) {
        throw Error(ErrorKind::NoRoots, "lambda exceeds lambda(u); the fiber has no critical point");
    }
    if (lambda >= lu * (1.0 - kTangencyTol)) return {tr, tr, true};

    const double level = lambda * sc.B;
    auto g = [&](double t) { return phi(t, sc, params) - level; };
    double lo = 0.5 * tr;
    while (g(lo) >= 0.0) lo *= 0.5;
    double hi = 2.0 * tr;
    while (g(hi) >= 0.0) hi *= 2.0;
    return {bisect(g, lo, tr), bisect(g, tr, hi), false};
}

double t_nonpositive_branch(double lambda, const FiberScalars& sc, const ProblemParams& params) {
    if (sc.B > 0.0) throw Error(ErrorKind::InvalidArgument, "nonpositive branch needs int f|u|^p <= 0");
    const double tr = t_root(sc, params);
    const double level = lambda * sc.B;
    auto g = [&](double t) { return phi(t, sc, params) - level; };
    double hi = 2.0 * tr;
    while (g(hi) >= 0.0) hi *= 2.0;
    return bisect(g, tr, hi);
}

double fiber_energy(double t, double lambda, const FiberScalars& sc, const ProblemParams& params) {
    const double crit = params.critical_exponent();
    const double A = t * t * sc.A;
    return 0.5 * kirchhoff_primitive(A, params) - lambda / params.p * std::pow(t, params.p) * sc.B -
           std::pow(t, crit) * sc.C / crit;
}

std::string to_string(NehariClass c) {
    switch (c) {
    case NehariClass::Nplus: return "Nplus";
    case NehariClass::Nminus: return "Nminus";
    case NehariClass::Nzero: return "Nzero";
    case NehariClass::NotOnNehari: return "NotOnNehari";
    }
    return "NotOnNehari";
}

FiberDerivatives fiber_derivatives(double lambda, const FiberScalars& sc, const ProblemParams& params) {
    const double crit = params.critical_exponent();
    const double aA = params.a * sc.A;
    const double bAt = params.b * power_theta(sc.A, params);
    FiberDerivatives d;
    d.first = aA + bAt - lambda * sc.B - sc.C;
    d.second = aA + (2.0 * params.theta - 1.0) * bAt - lambda * (params.p - 1.0) * sc.B - (crit - 1.0) * sc.C;
    d.scale = aA + bAt + std::abs(lambda * sc.B) + sc.C;
    return d;
}

NehariClass classify(double lambda, const FiberScalars& sc, const ProblemParams& params, double tol) {
    const auto d = fiber_derivatives(lambda, sc, params);
    if (!(d.scale > 0.0) || std::abs(d.first) > tol * d.scale) return NehariClass::NotOnNehari;
    if (std::abs(d.second) <= tol * d.scale) return NehariClass::Nzero;
    return d.second > 0.0 ? NehariClass::Nplus : NehariClass::Nminus;
}

FiberingReport fiber_report(double lambda, const FiberScalars& sc, const ProblemParams& params) {
    FiberingReport r;
    r.scalars = sc;
    r.lambda = lambda;
    r.t_star = t_star(sc, params);
    r.t_root = t_root(sc, params);
    r.phi_max = phi(r.t_root, sc, params);
    r.classification = classify(lambda, sc, params);
    if (sc.B > 0.0) {
        r.lambda_u = lambda_of_u(sc, params);
        if (lambda <= *r.lambda_u * (1.0 + kTangencyTol)) {
            const auto roots = t_plus_minus(lambda, sc, params);
            r.t_plus = roots.t_plus;
            r.t_minus = roots.t_minus;
        }
    } else {
        r.nonpositive_branch = true;
        r.t_minus = t_nonpositive_branch(lambda, sc, params);
    }
    return r;
}

double lambda_1(const ProblemParams& params, double norm_f, double S) {
    const double p = params.p, crit = params.critical_exponent(), th = params.theta, b = params.b;
    if (!(crit - 2.0 * th > 0.0) || !(2.0 * th - p > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "lambda_1 needs p < 2 theta < 2*");
    }
    if (!(norm_f > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda_1 needs ||f|| > 0");
    const double g = crit - 2.0 * th;
    return (g / (2.0 * th - p)) * std::pow(b * (2.0 * th - p) / (crit - p), (crit - p) / g) *
           std::pow(std::pow(S, crit / 2.0), (2.0 * th - p) / g) * std::pow(S, p / 2.0) / norm_f;
}

namespace {

// lambda^{2theta/(2theta-p)} times this constant is the subtracted term of c_lambda.
double c_lambda_coefficient(const ProblemParams& params, double norm_f, double S) {
    const double p = params.p, crit = params.critical_exponent(), th = params.theta;
    const double q = 2.0 * th - p;
    return (q / (crit * p * 2.0 * th)) * std::pow((crit - p) * std::pow(S, -p / 2.0) * norm_f, 2.0 * th / q) /
           std::pow((crit - 2.0 * th) * params.b, p / q);
}

}  // namespace

double c_lambda_limit(const ProblemParams& params, double S) {
    const double n = params.dim;
    return std::pow(params.a * S, n / 2.0) / n;
}

double c_lambda(double lambda, const ProblemParams& params, double norm_f, double S) {
    const double q = 2.0 * params.theta - params.p;
    return c_lambda_limit(params, S) -
           std::pow(lambda, 2.0 * params.theta / q) * c_lambda_coefficient(params, norm_f, S);
}

double lambda_2(const ProblemParams& params, double norm_f, double S) {
    const double q = 2.0 * params.theta - params.p;
    return std::pow(c_lambda_limit(params, S) / c_lambda_coefficient(params, norm_f, S), q / (2.0 * params.theta));
}

Thresholds thresholds(const ProblemParams& params, double norm_f, double S) {
    Thresholds t;
    t.lambda_1 = lambda_1(params, norm_f, S);
    t.lambda_2 = lambda_2(params, norm_f, S);
    t.lambda_0 = std::min(t.lambda_1, t.lambda_2);
    return t;
}

double coercivity_floor(double lambda, const ProblemParams& params, double norm_f, double S) {
    const double p = params.p, crit = params.critical_exponent(), q = 2.0 * params.theta;
    const double alpha = (1.0 / q - 1.0 / crit) * params.b;
    const double beta = lambda * (1.0 / p - 1.0 / crit) * std::pow(S, -p / 2.0) * norm_f;
    if (beta <= 0.0) return 0.0;
    const double t = std::pow(p * beta / (q * alpha), 1.0 / (q - p));
    return alpha * std::pow(t, q) - beta * std::pow(t, p);
}

double nminus_norm_lower_bound(const ProblemParams& params, double S) {
    const double p = params.p, crit = params.critical_exponent(), th = params.theta;
    return std::pow(params.b * (2.0 * th - p) * std::pow(S, crit / 2.0) / (crit - p), 1.0 / (crit - 2.0 * th));
}

ExtremalEstimate extremal_lambda_estimate(const ScalarSampler& sampler, std::size_t count,
                                          const ProblemParams& params) {
    ExtremalEstimate est;
    bool found = false;
    for (std::size_t i = 0; i < count; ++i) {
        const auto sc = sampler(i);
        if (!(sc.B > 0.0) || !(sc.A > 0.0) || !(sc.C > 0.0)) continue;
        ++est.admissible;
        const double l = lambda_of_u(sc, params);
        if (!found || l < est.estimate) {
            est.estimate = l;
            est.argmin = i;
            found = true;
        }
    }
    if (!found) throw Error(ErrorKind::NoAdmissibleSample, "no sample with int f|u|^p > 0");
    return est;
}

Field random_smooth_field(const GridPtr& grid, std::uint64_t seed, std::size_t index) {
    constexpr int kModes = 3;
    const int dim = grid->dim();
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);

    int total = 1;
    for (int k = 0; k < dim; ++k) total *= kModes;
    std::vector<double> coef(total);
    std::vector<std::vector<int>> modes(total, std::vector<int>(dim));
    for (int m_ = 0; m_ < total; ++m_) {
        int rem = m_;
        double norm2 = 0.0;
        for (int k = dim - 1; k >= 0; --k) {
            modes[m_][k] = rem % kModes + 1;
            rem /= kModes;
            norm2 += modes[m_][k] * modes[m_][k];
        }
        coef[m_] = normal(rng) / norm2;
    }
    return Field::from_function(grid, [&](std::span<const double> x) {
        double v = 0.0;
        for (int m_ = 0; m_ < total; ++m_) {
            double prod = coef[m_];
            for (int k = 0; k < dim; ++k) {
                const double lo = grid->center()[k] - grid->half_widths()[k];
                prod *= std::sin(modes[m_][k] * std::numbers::pi * (x[k] - lo) / (2.0 * grid->half_widths()[k]));
            }
            v += prod;
        }
        return v;
    });
}

ScalarSampler field_sampler(const DiscreteProblem& problem, std::uint64_t seed) {
    return [&problem, seed](std::size_t index) {
        return scalars(random_smooth_field(problem.grid, seed, index), problem);
    };
}

}  // namespace nehari
