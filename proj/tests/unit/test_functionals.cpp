#include <doctest.h>

#include "nehari/error.hpp"
#include "nehari/fibering.hpp"
#include "nehari/functionals.hpp"

#include <cmath>
#include <random>

using namespace nehari;

namespace {

DiscreteProblem small_problem(double lambda = 0.7, WeightDescriptor weight = WeightDescriptor::constant(1.0)) {
    ProblemParams p;
    p.lambda = lambda;
    p.domain = DomainDescriptor::cube(3, 1.0, 5);
    p.weight = weight;
    return DiscreteProblem::build(p);
}

Eigen::VectorXd random_vector(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (auto& x : v) x = N(rng);
    return v;
}

}  // namespace

TEST_CASE("Kirchhoff map and primitive") {
    ProblemParams p;
    p.a = 2.0;
    p.b = 3.0;
    p.theta = 2.0;
    CHECK(kirchhoff(4.0, p) == doctest::Approx(2.0 + 3.0 * 4.0));
    CHECK(kirchhoff_primitive(4.0, p) == doctest::Approx(8.0 + 1.5 * 16.0));
    p.theta = 1.0;
    CHECK(kirchhoff(0.0, p) == doctest::Approx(5.0));
    CHECK(kirchhoff_primitive(2.0, p) == doctest::Approx(10.0));
    // M-hat' = M
    p.theta = 1.7;
    const double t = 1.3, h = 1e-6;
    CHECK((kirchhoff_primitive(t + h, p) - kirchhoff_primitive(t - h, p)) / (2 * h) ==
          doctest::Approx(kirchhoff(t, p)).epsilon(1e-8));
}

TEST_CASE("weight norm of a constant") {
    const auto pb = small_problem();
    CHECK(pb.f_norm == doctest::Approx(std::pow(8.0, 0.75)).epsilon(1e-12));
}

TEST_CASE("energy decomposes into its terms") {
    const auto pb = small_problem();
    const Eigen::VectorXd u = random_vector(pb.grid->size(), 1);
    const auto e = energy(u, pb);
    const auto sc = scalars(u, pb);
    CHECK(e.local_part + e.fractional_part == doctest::Approx(sc.A).epsilon(1e-12));
    CHECK(e.total == doctest::Approx(e.kirchhoff_energy - e.concave_term - e.critical_term));
    CHECK(e.total == doctest::Approx(energy_from_scalars(sc, pb.params)).epsilon(1e-12));
    CHECK(e.critical_term == doctest::Approx(sc.C / 6.0));
    CHECK(e.concave_term == doctest::Approx(pb.params.lambda * sc.B / 1.5));
}

TEST_CASE("scalars scale homogeneously") {
    const auto pb = small_problem();
    const Eigen::VectorXd u = random_vector(pb.grid->size(), 2);
    const auto sc = scalars(u, pb);
    for (double c : {0.3, -2.0, 7.0}) {
        const auto direct = scalars(Eigen::VectorXd(c * u), pb);
        const auto scaled = sc.scaled(c, pb.params.p, pb.crit());
        CHECK(direct.A == doctest::Approx(scaled.A).epsilon(1e-12));
        CHECK(direct.B == doctest::Approx(scaled.B).epsilon(1e-12));
        CHECK(direct.C == doctest::Approx(scaled.C).epsilon(1e-12));
    }
    CHECK(sobolev_quotient(u, pb.forms, 6.0) ==
          doctest::Approx(sobolev_quotient(Eigen::VectorXd(5.0 * u), pb.forms, 6.0)).epsilon(1e-12));
    CHECK(local_sobolev_quotient(u, pb.forms, 6.0) < sobolev_quotient(u, pb.forms, 6.0));
    CHECK_THROWS_AS(sobolev_quotient(Eigen::VectorXd::Zero(pb.grid->size()), pb.forms, 6.0), Error);
}

TEST_CASE("gradient matches central differences") {
    WeightDescriptor w;
    w.kind = WeightKind::SeparableCosine;
    w.offset = 0.3;
    w.amplitude = 1.0;
    w.frequency = 2.5;
    const auto pb = small_problem(1.3, w);
    for (unsigned k = 0; k < 10; ++k) {
        const Eigen::VectorXd u = random_vector(pb.grid->size(), 10 + k);
        const Eigen::VectorXd v = random_vector(pb.grid->size(), 100 + k);
        for (auto part : {Nonlinearity::Full, Nonlinearity::PositivePart}) {
            const double h = 1e-6;
            const double fd = (energy(Eigen::VectorXd(u + h * v), pb, part).total -
                               energy(Eigen::VectorXd(u - h * v), pb, part).total) /
                              (2 * h);
            const double an = gradient(u, pb, part).dot(v);
            CHECK(an == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("Nehari identity: gradient paired with u is m'(1)") {
    const auto pb = small_problem();
    const Eigen::VectorXd u = random_vector(pb.grid->size(), 77);
    const auto sc = scalars(u, pb);
    const auto d = fiber_derivatives(pb.params.lambda, sc, pb.params);
    CHECK(gradient(u, pb).dot(u) == doctest::Approx(d.first).epsilon(1e-10));
}

TEST_CASE("positive-part functional ignores the negative part in the nonlinear terms") {
    const auto pb = small_problem();
    const Eigen::VectorXd u = random_vector(pb.grid->size(), 5);
    const Eigen::VectorXd up = u.cwiseMax(0.0);
    const auto sp = scalars(u, pb, Nonlinearity::PositivePart);
    const auto sf = scalars(up, pb);
    CHECK(sp.B == doctest::Approx(sf.B).epsilon(1e-12));
    CHECK(sp.C == doctest::Approx(sf.C).epsilon(1e-12));
    CHECK(sp.A == doctest::Approx(scalars(u, pb).A));
}

TEST_CASE("with_params keeps the grid and recomputes the weight") {
    const auto pb = small_problem();
    auto p = pb.params;
    p.lambda = 0.01;
    p.weight = WeightDescriptor::constant(-2.0);
    const auto q = pb.with_params(p);
    CHECK(q.grid == pb.grid);
    CHECK(q.f[0] == -2.0);
    CHECK(q.f_norm == doctest::Approx(2.0 * pb.f_norm));
    p.s = 0.3;
    CHECK_THROWS_AS(pb.with_params(p), Error);
}
