// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any line fails.

#include "nehari/config_io.hpp"
#include "nehari/error.hpp"
#include "nehari/fibering.hpp"
#include "nehari/functionals.hpp"
#include "nehari/json_io.hpp"
#include "nehari/nehari_solver.hpp"
#include "nehari/runner.hpp"
#include "nehari/talenti.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace nehari;
namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

void run(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < budget_s;
    const bool ok = out.pass && in_time;
    if (!ok) ++failures;
    std::printf("%s  %-44s %8.3fs (budget %.0fs)  %s%s\n", ok ? "PASS" : "FAIL", name.c_str(), secs, budget_s,
                out.detail.c_str(), in_time ? "" : "  [over time budget]");
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

ProblemParams canonical() {
    ProblemParams p;
    p.a = 1.0;
    p.b = 1.0;
    p.theta = 2.0;
    p.p = 1.5;
    p.s = 0.5;
    p.dim = 3;
    p.lambda = 0.5;
    p.domain = DomainDescriptor::cube(3, 1.0, 5);
    return p;
}

// Random triple with log-uniform scalars; with vary_params also random a, b, theta in [1, 2*/2), p in (1, 2).
struct RandomCase {
    ProblemParams params;
    FiberScalars sc;
};

RandomCase random_case(std::mt19937_64& rng, bool vary_params = true) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto logu = [&](double lo, double hi) { return std::exp(std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo))); };
    RandomCase c;
    c.params = canonical();
    if (vary_params) {
        const double crit = c.params.critical_exponent();
        c.params.a = logu(0.1, 10.0);
        c.params.b = logu(1e-3, 10.0);
        c.params.theta = 1.0 + unit(rng) * (0.5 * crit - 1.0) * 0.95;
        c.params.p = 1.05 + 0.9 * unit(rng);
    }
    c.sc = {logu(1e-2, 1e2), logu(1e-2, 1e2), logu(1e-2, 1e2)};
    return c;
}

// Phi'(t) written out directly from Phi(t) = a t^{2-p} A + b t^{2 theta - p} A^theta - t^{2*-p} C.
double phi_prime_oracle(double t, const FiberScalars& sc, const ProblemParams& q) {
    const double crit = q.critical_exponent();
    return q.a * (2.0 - q.p) * std::pow(t, 1.0 - q.p) * sc.A +
           q.b * (2.0 * q.theta - q.p) * std::pow(t, 2.0 * q.theta - q.p - 1.0) * std::pow(sc.A, q.theta) -
           (crit - q.p) * std::pow(t, crit - q.p - 1.0) * sc.C;
}

double phi_oracle(double t, const FiberScalars& sc, const ProblemParams& q) {
    const double crit = q.critical_exponent();
    return q.a * std::pow(t, 2.0 - q.p) * sc.A + q.b * std::pow(t, 2.0 * q.theta - q.p) * std::pow(sc.A, q.theta) -
           std::pow(t, crit - q.p) * sc.C;
}

double bisect_oracle(const std::function<double(double)>& g, double lo, double hi) {
    double glo = g(lo);
    for (int k = 0; k < 400 && hi - lo > 1e-16 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm > 0) == (glo > 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

ExperimentConfig load(const std::string& name) {
    return load_config(std::string(NEHARI_SOURCE_DIR) + "/configs/" + name,
                       [](const std::string&) { return std::optional<std::string>{}; });
}

DiscreteProblem resolved_problem(const ExperimentConfig& cfg) {
    auto pb = DiscreteProblem::build(cfg.params, cfg.forms, cfg.cache_dir);
    ProblemParams p = cfg.params;
    p.lambda = resolve_lambda(cfg, pb.f_norm);
    return pb.with_params(p);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "nehari_acceptance";
    fs::create_directories(out);

    run("1 fibering oracles (canonical triple)", 1.0, [] {
        const auto q = canonical();
        const FiberScalars sc{1.0, 1.0, 1.0};
        const double ts_ref = std::sqrt(5.0 / 18.0);
        const double tr_ref = std::sqrt((2.5 + std::sqrt(15.25)) / 9.0);
        const double lu_ref = phi_oracle(tr_ref, sc, q) / sc.B;
        const double lambda = 0.5;
        const double tp_ref = bisect_oracle([&](double t) { return phi_oracle(t, sc, q) - lambda; }, 1e-12, tr_ref);
        const double tm_ref = bisect_oracle([&](double t) { return phi_oracle(t, sc, q) - lambda; }, tr_ref, 10.0);
        const auto roots = t_plus_minus(lambda, sc, q);
        const double e = std::max({rel(*t_star(sc, q), ts_ref), rel(t_root(sc, q), tr_ref),
                                   rel(lambda_of_u(sc, q), lu_ref), rel(roots.t_plus, tp_ref),
                                   rel(roots.t_minus, tm_ref)});
        return Outcome{e <= 1e-10, fmt("max rel err %.2e (tol 1e-10), lambda(u) = %.12f", e, lu_ref)};
    });

    run("2 homogeneity of lambda(u) and t(u)", 5.0, [] {
        std::mt19937_64 rng(20251015);
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const auto c = random_case(rng);
            const double crit = c.params.critical_exponent();
            const double l = lambda_of_u(c.sc, c.params);
            const double t = t_root(c.sc, c.params);
            for (double s : {0.1, 0.5, 2.0, 10.0}) {
                const auto scs = c.sc.scaled(s, c.params.p, crit);
                worst = std::max({worst, rel(lambda_of_u(scs, c.params), l), rel(t_root(scs, c.params), t / s)});
            }
        }
        return Outcome{worst <= 1e-8, fmt("1000 triples x 4 scalings, max rel err %.2e (tol 1e-8)", worst)};
    });

    run("3 single sign change of m_u", 10.0, [] {
        std::mt19937_64 rng(77);
        int bad = 0, disagree = 0;
        const int n = 10000;
        std::vector<double> grid(n);
        for (int i = 0; i < n; ++i) grid[i] = std::pow(10.0, -6.0 + 12.0 * i / (n - 1));
        for (int k = 0; k < 1000; ++k) {
            const auto c = random_case(rng, false);
            int changes = 0, changes_oracle = 0;
            double prev = m(grid[0], c.sc, c.params), prev_o = phi_prime_oracle(grid[0], c.sc, c.params);
            std::size_t where = 0;
            for (int i = 1; i < n; ++i) {
                const double cur = m(grid[i], c.sc, c.params);
                const double cur_o = phi_prime_oracle(grid[i], c.sc, c.params);
                if ((cur > 0) != (prev > 0)) {
                    ++changes;
                    where = i;
                }
                if ((cur_o > 0) != (prev_o > 0)) ++changes_oracle;
                prev = cur;
                prev_o = cur_o;
            }
            const double tr = t_root(c.sc, c.params);
            const bool located = changes == 1 && grid[where - 1] <= tr * (1 + 1e-12) && tr <= grid[where] * (1 + 1e-12);
            if (!located || changes_oracle != 1) ++bad;
            if (changes != changes_oracle) ++disagree;
        }
        return Outcome{bad == 0, fmt("1000 canonical-parameter triples on a 1e4-point grid over [1e-6,1e6]: %d without a single bracketed "
                                     "change, %d library/oracle disagreements",
                                     bad, disagree)};
    });

    run("4 threshold consistency", 60.0, [] {
        auto p = canonical();
        p.domain = DomainDescriptor::cube(3, 1.0, 7);
        const auto pb = DiscreteProblem::build(p);
        double s_disc = std::numeric_limits<double>::infinity();
        double min_lambda = std::numeric_limits<double>::infinity();
        int admissible = 0;
        for (std::size_t i = 0; admissible < 500 && i < 5000; ++i) {
            const Field u = random_smooth_field(pb.grid, 4242, i);
            const auto sc = scalars(u, pb);
            if (!(sc.B > 0.0)) continue;
            ++admissible;
            s_disc = std::min(s_disc, sobolev_quotient(u, pb.forms, pb.crit()));
            min_lambda = std::min(min_lambda, lambda_of_u(sc, p));
        }
        const double l1 = lambda_1(p, pb.f_norm, s_disc);
        const auto th = thresholds(p, pb.f_norm, s_disc);
        const double c_at_l2 = c_lambda(th.lambda_2, p, pb.f_norm, s_disc);
        const double c_scale = c_lambda_limit(p, s_disc);
        const bool min_ok = th.lambda_0 == std::min(th.lambda_1, th.lambda_2);
        const bool ok = admissible == 500 && l1 <= min_lambda && std::abs(c_at_l2) <= 1e-10 * c_scale && min_ok;
        return Outcome{ok, fmt("%d samples, S_disc %.4f, Lambda_1 %.6g <= min lambda(u) %.6g; c(Lambda_2)/c_limit "
                               "%.1e; Lambda_0 = min: %s",
                               admissible, s_disc, l1, min_lambda, std::abs(c_at_l2) / c_scale,
                               min_ok ? "yes" : "no")};
    });

    run("5 gradient vs central differences (7^3)", 30.0, [] {
        auto p = canonical();
        p.domain = DomainDescriptor::cube(3, 1.0, 7);
        p.lambda = 0.3;
        const auto pb = DiscreteProblem::build(p);
        double worst = 0.0;
        for (std::size_t k = 0; k < 200; ++k) {
            const Eigen::VectorXd u = random_smooth_field(pb.grid, 501, k).values();
            const Eigen::VectorXd v = random_smooth_field(pb.grid, 502, k).values();
            const double h = 1e-5;
            const double fd = (energy(Eigen::VectorXd(u + h * v), pb).total -
                               energy(Eigen::VectorXd(u - h * v), pb).total) / (2.0 * h);
            const double an = gradient(u, pb).dot(v);
            worst = std::max(worst, rel(an, fd));
        }
        return Outcome{worst <= 1e-4, fmt("200 pairs, max rel err %.2e (tol 1e-4)", worst)};
    });

    run("6 bubble quotients above S_3 (17^3)", 300.0, [] {
        auto p = canonical();
        p.domain = DomainDescriptor::cube(3, 1.0, 17);
        const auto pb = DiscreteProblem::build(p);
        const double s3 = sobolev_constant_closed_form(3);
        std::vector<double> q;
        for (double eps : {0.4, 0.2, 0.1}) {
            const Field w = normalized_bubble(pb.grid, {eps, 1.0, {}}, p);
            q.push_back(sobolev_quotient(w, pb.forms, pb.crit()));
        }
        const bool above = q[0] > s3 && q[1] > s3 && q[2] > s3;
        const bool nonincreasing = q[0] >= q[1] && q[1] >= q[2];
        return Outcome{above && nonincreasing,
                       fmt("Q(0.4) %.4f, Q(0.2) %.4f, Q(0.1) %.4f vs S_3 %.4f; nonincreasing along 0.4 -> 0.1: %s",
                           q[0], q[1], q[2], s3, nonincreasing ? "yes" : "no")};
    });

    run("7 first solution on N+ (9^3)", 120.0, [] {
        const auto cfg = load("first_solution.toml");
        const auto pb = resolved_problem(cfg);
        const auto raw = minimize_nplus(default_seed(pb.grid, cfg.seed), pb, cfg.tols);
        const auto u0 = enforce_nonnegativity(raw, pb, cfg.tols);
        const double minv = u0.field.min_value(), maxa = u0.field.max_abs();
        const bool ok = raw.converged && u0.converged && u0.nehari_residual <= 1e-8 && u0.energy < 0.0 &&
                        u0.classification == NehariClass::Nplus && minv >= -1e-8 * maxa;
        return Outcome{ok, fmt("converged %s, residual %.1e, J(u0) %.6g, min/max %.1e, %s", u0.converged ? "yes" : "no",
                               u0.nehari_residual, u0.energy, minv / maxa, to_string(u0.classification).c_str())};
    });

    {
        const auto cfg = load("two_solutions.toml");
        std::optional<DiscreteProblem> pb;
        std::optional<SolveResult> u0, u1;
        std::optional<PathCrossing> cross;
        NminusReport rep;
        const double S = sobolev_for(cfg);

        run("8a path crossing onto N-", 300.0, [&] {
            pb = resolved_problem(cfg);
            u0 = enforce_nonnegativity(minimize_nplus(default_seed(pb->grid, cfg.seed), *pb, cfg.tols), *pb, cfg.tols);
            const Field w = normalized_bubble(pb->grid, {cfg.bubble.epsilon, *cfg.bubble.cutoff_radius, {}}, pb->params);
            cross = find_path_crossing(u0->field, w, cfg.bubble.l0_max, pb->params.lambda, *pb);
            const auto c = classify(pb->params.lambda, scalars(cross->field, *pb), pb->params);
            return Outcome{c == NehariClass::Nminus,
                           fmt("t_cross %.4f, l0 %.3g, crossing classifies %s", cross->t_cross, cross->l0,
                               to_string(c).c_str())};
        });

        run("8b N- solve converges, classification Nminus", 300.0, [&] {
            if (!cross) return Outcome{false, "no crossing"};
            u1 = minimize_nminus(cross->field, *pb, S, cfg.tols, false, &u0->field, &rep);
            return Outcome{u1->converged && u1->classification == NehariClass::Nminus,
                           fmt("%d iterations, gradient %.1e, residual %.1e, %s", u1->iterations, u1->gradient_norm,
                               u1->nehari_residual, to_string(u1->classification).c_str())};
        });

        run("8c 0 < J(u1) < c_lambda", 1.0, [&] {
            if (!u1) return Outcome{false, "no second solution"};
            return Outcome{u1->energy > 0.0 && rep.below_threshold,
                           fmt("J(u1) %.6g, c_lambda %.6g, margin %.6g", u1->energy, rep.c_lambda, rep.margin)};
        });

        run("8d rho(u1) >= delta", 1.0, [&] {
            if (!u1) return Outcome{false, "no second solution"};
            return Outcome{rep.rho >= rep.delta,
                           fmt("rho %.4f, delta %.4f (S used %.4f)", rep.rho, rep.delta, rep.sobolev_used)};
        });

        run("8e u1 distinct from u0", 1.0, [&] {
            if (!u1 || !rep.distance_ratio) return Outcome{false, "no second solution"};
            return Outcome{*rep.distance_ratio > 1e-3, fmt("rho(u1-u0)/rho(u0) %.4g (> 1e-3)", *rep.distance_ratio)};
        });

        run("8f failure contract (exit code, c_lambda margin)", 300.0, [&] {
            std::ostringstream log;
            const auto res = cmd_solve(cfg, (fs::path(out) / "solve_two").string(), log);
            const auto& m = res.manifest;
            if (res.exit_code == 0) {
                const bool ok = m["failures"].empty() && m["results"].size() == 2;
                return Outcome{ok, "run succeeded with both solutions"};
            }
            bool margin = false;
            for (const auto& f : m["failures"]) {
                if (f.value("exit_code", 0) == 3 && f.contains("c_lambda_margin")) margin = true;
            }
            const bool has_cl = m["derived"].contains("c_lambda");
            const bool ok = res.exit_code == 3 && margin && has_cl && m["status"] == "failed";
            return Outcome{ok, fmt("exit %d, status %s, failure reported with c_lambda margin: %s", res.exit_code,
                                   std::string(m["status"]).c_str(), margin ? "yes" : "no")};
        });
    }

    run("9 deterministic re-run from manifest", 300.0, [&] {
        const auto cfg = load("two_solutions.toml");
        std::ostringstream log;
        const fs::path first = out / "determinism_0";
        cmd_solve(cfg, first.string(), log);
        const fs::path a = out / "determinism_1", b = out / "determinism_2";
        cmd_solve_from_manifest((first / "manifest.json").string(), a.string(), log);
        cmd_solve_from_manifest((first / "manifest.json").string(), b.string(), log);
        const std::string ma = slurp(a / "manifest.json"), mb = slurp(b / "manifest.json");
        const bool fields = slurp(a / "u0.csv") == slurp(b / "u0.csv");
        const bool ok = !ma.empty() && ma == mb && ma == slurp(first / "manifest.json") && fields;
        return Outcome{ok, fmt("manifest %zu bytes, identical: %s, fields identical: %s", ma.size(),
                               ma == mb ? "yes" : "no", fields ? "yes" : "no")};
    });

    std::printf("%d failing line(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
