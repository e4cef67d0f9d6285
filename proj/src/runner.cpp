#include "nehari/runner.hpp"

#include "nehari/json_io.hpp"
#include "nehari/nehari_solver.hpp"
#include "nehari/talenti.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace nehari {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::InvalidArgument:
    case ErrorKind::EmptyDomain:
    case ErrorKind::BubbleOutsideDomain: return 2;
    case ErrorKind::NonnegativityFailed: return 4;
    case ErrorKind::Io: return 1;
    case ErrorKind::ZeroField:
    case ErrorKind::NoRoot:
    case ErrorKind::NoRoots:
    case ErrorKind::NonPositiveConcaveTerm:
    case ErrorKind::ProjectionLost:
    case ErrorKind::NoNminusProjection:
    case ErrorKind::NoNplusProjection:
    case ErrorKind::MaxIterations:
    case ErrorKind::LineSearchFailed:
    case ErrorKind::EnergyAboveThreshold:
    case ErrorKind::NoAdmissibleSample:
    case ErrorKind::NoU2Point: return 3;
    }
    return 1;
}

double sobolev_for(const ExperimentConfig& cfg) {
    return cfg.sobolev_constant.value_or(sobolev_constant_closed_form(cfg.params.dim));
}

double resolve_lambda(const ExperimentConfig& cfg, double f_norm) {
    if (!cfg.lambda_factor) return cfg.params.lambda;
    return *cfg.lambda_factor * thresholds(cfg.params, f_norm, sobolev_for(cfg)).lambda_0;
}

namespace {

// Validation with lambda_factor in place of a resolved lambda.
void require_valid_config(const ExperimentConfig& cfg) {
    ProblemParams p = cfg.params;
    if (cfg.lambda_factor) {
        if (!(*cfg.lambda_factor > 0.0)) throw Error(ErrorKind::Config, "model.lambda_factor must be positive");
        p.lambda = 1.0;
    }
    require_valid(p);
}

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir + "'");
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::ofstream os(fs::path(dir) / name);
    if (!os) throw Error(ErrorKind::Io, "cannot write '" + name + "' in '" + dir + "'");
    os << std::setprecision(17);
    return os;
}

void write_json(const std::string& dir, const std::string& name, const ordered_json& j) {
    auto os = open_out(dir, name);
    os << j.dump(2) << '\n';
}

double f_norm_on_grid(const ProblemParams& params) {
    const auto grid = Grid::build(params.domain);
    const Eigen::VectorXd f = grid->sample([&](std::span<const double> x) { return params.weight(x); });
    return weight_norm(*grid, f, params.p, params.critical_exponent());
}

ordered_json failure_json(const std::string& stage, const Error& e) {
    return {{"stage", stage}, {"kind", std::string(to_string(e.kind()))}, {"message", e.what()},
            {"exit_code", exit_code_for(e.kind())}};
}

ordered_json derived_json(const ProblemParams& params, double f_norm, double S) {
    const auto th = thresholds(params, f_norm, S);
    const auto rep = validate(params);
    return {{"critical_exponent", params.critical_exponent()},
            {"sobolev_closed_form", sobolev_constant_closed_form(params.dim)},
            {"sobolev_used", S},
            {"f_norm", f_norm},
            {"lambda_1", th.lambda_1},
            {"lambda_2", th.lambda_2},
            {"lambda_0", th.lambda_0},
            {"lambda_00", "unavailable"},
            {"c_lambda", c_lambda(params.lambda, params, f_norm, S)},
            {"dimension_condition_holds", rep.dimension_condition_holds}};
}

BubbleSpec bubble_spec(const ExperimentConfig& cfg) {
    BubbleSpec spec;
    spec.epsilon = cfg.bubble.epsilon;
    const auto& hw = cfg.params.domain.half_widths;
    spec.cutoff_radius = cfg.bubble.cutoff_radius.value_or(*std::min_element(hw.begin(), hw.end()));
    spec.center = cfg.bubble.center;
    return spec;
}

std::vector<double> profile_radii(const BubbleConfig& b) {
    std::vector<double> r;
    for (int k = 1; k <= b.profile_points; ++k) r.push_back(b.profile_max * k / b.profile_points);
    return r;
}

// N+ solve followed by the positive-part re-solve.
SolveResult first_solution(const DiscreteProblem& problem, const ExperimentConfig& cfg,
                           int* full_iterations = nullptr) {
    const SolveResult raw = minimize_nplus(default_seed(problem.grid, cfg.seed), problem, cfg.tols);
    if (full_iterations) *full_iterations = raw.iterations;
    return enforce_nonnegativity(raw, problem, cfg.tols);
}

struct SecondSolution {
    PathCrossing crossing;
    std::vector<ProfilePoint> profile;
    LevelCheck level;
    SolveResult result;
    NminusReport report;
};

SecondSolution second_solution(const DiscreteProblem& problem, const ExperimentConfig& cfg, const Field& u0,
                               double S) {
    SecondSolution out;
    const Field w = normalized_bubble(problem.grid, bubble_spec(cfg), problem.params);
    const double cl = c_lambda(problem.params.lambda, problem.params, problem.f_norm, S);
    out.profile = energy_profile(u0, w, profile_radii(cfg.bubble), problem);
    out.level = path_level_check(out.profile, cl);
    out.crossing = find_path_crossing(u0, w, cfg.bubble.l0_max, problem.params.lambda, problem);
    out.result = minimize_nminus(out.crossing.field, problem, S, cfg.tols, false, &u0, &out.report);
    return out;
}

}  // namespace

void write_bifurcation_csv(std::ostream& os, const FiberScalars& sc, const ProblemParams& params,
                           const std::vector<double>& lambdas) {
    os << std::setprecision(17) << "lambda,t_plus,t_minus,J_plus,J_minus\n";
    for (double l : lambdas) {
        os << l << ',';
        if (sc.B > 0.0) {
            if (l <= lambda_of_u(sc, params) * (1.0 + 1e-10)) {
                const auto r = t_plus_minus(l, sc, params);
                os << r.t_plus << ',' << r.t_minus << ',' << fiber_energy(r.t_plus, l, sc, params) << ','
                   << fiber_energy(r.t_minus, l, sc, params);
            } else {
                os << ",,,";
            }
        } else {
            const double t = t_nonpositive_branch(l, sc, params);
            os << ',' << t << ",," << fiber_energy(t, l, sc, params);
        }
        os << '\n';
    }
}

CommandResult cmd_fiber(const ExperimentConfig& cfg, const std::optional<FiberScalars>& triple,
                        const std::string& out_dir, std::ostream& log) {
    require_valid_config(cfg);
    ProblemParams params = cfg.params;
    FiberScalars sc;
    std::string mode;
    if (triple) {
        sc = *triple;
        mode = "scalar";
        if (cfg.lambda_factor) params.lambda = resolve_lambda(cfg, f_norm_on_grid(params));
    } else {
        const auto problem = DiscreteProblem::build(params, cfg.forms, cfg.cache_dir);
        params.lambda = resolve_lambda(cfg, problem.f_norm);
        sc = scalars(default_seed(problem.grid, cfg.seed), problem);
        mode = "field";
    }
    const auto report = fiber_report(params.lambda, sc, params);

    std::vector<double> lambdas;
    const double top = report.lambda_u ? *report.lambda_u : 2.0 * params.lambda;
    for (int k = 1; k <= 40; ++k) lambdas.push_back(top * k / 40.0);

    CommandResult res;
    res.manifest = {{"command", "fiber"}, {"mode", mode}, {"config", to_json(cfg)}, {"report", to_json(report)},
                    {"files", {{"bifurcation", "bifurcation.csv"}}}};
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_json(out_dir, "fiber_report.json", res.manifest);
        auto os = open_out(out_dir, "bifurcation.csv");
        write_bifurcation_csv(os, sc, params, lambdas);
    }
    log << res.manifest["report"].dump(2) << '\n';
    return res;
}

CommandResult cmd_solve(const ExperimentConfig& cfg_in, const std::string& out_dir, std::ostream& log) {
    require_valid_config(cfg_in);
    validate_branch(cfg_in.branch);
    ensure_dir(out_dir);
    ExperimentConfig cfg = cfg_in;
    Stopwatch sw, total;
    ordered_json timings;

    auto problem = DiscreteProblem::build(cfg.params, cfg.forms, cfg.cache_dir);
    cfg.params.lambda = resolve_lambda(cfg, problem.f_norm);
    problem = problem.with_params(cfg.params);
    timings["assembly_s"] = sw.lap();
    const double S = sobolev_for(cfg);

    CommandResult res;
    ordered_json& m = res.manifest;
    m["command"] = "solve";
    m["config"] = to_json(cfg);
    m["params_hash"] = fnv1a_hex(m["config"].dump());
    m["seed"] = cfg.seed;
    m["derived"] = derived_json(cfg.params, problem.f_norm, S);
    ordered_json warnings = ordered_json::array();
    const double lambda_0 = m["derived"]["lambda_0"];
    if (cfg.params.lambda >= lambda_0) {
        warnings.push_back("lambda >= Lambda_0: existence of two solutions is not guaranteed");
        log << "warning: lambda = " << cfg.params.lambda << " >= Lambda_0 = " << lambda_0 << '\n';
    }
    for (const auto& note : validate(cfg.params).notes) warnings.push_back(note);
    ordered_json results = ordered_json::array();
    ordered_json failures = ordered_json::array();
    ordered_json files = ordered_json::object();
    int exit_code = 0;

    const bool want_plus = cfg.branch != "nminus";
    const bool want_minus = cfg.branch != "nplus";

    std::optional<SolveResult> u0;
    try {
        int full_iterations = 0;
        u0 = first_solution(problem, cfg, &full_iterations);
        timings["nplus_s"] = sw.lap();
        write_field_csv(u0->field, (fs::path(out_dir) / "u0.csv").string());
        files["u0"] = "u0.csv";
        auto j = to_json(*u0);
        j["role"] = want_plus ? "first_solution" : "path_start";
        j["full_nonlinearity_iterations"] = full_iterations;
        j["field_file"] = "u0.csv";
        j["palais_smale"] = to_json(palais_smale_check(u0->trace, cfg.tols.gradient));
        j["energy_negative"] = u0->energy < 0.0;
        results.push_back(j);
        log << "N+ : J(u0) = " << u0->energy << " after " << full_iterations << " + " << u0->iterations
            << " iterations (full, positive part)\n";
    } catch (const Error& e) {
        failures.push_back(failure_json("nplus", e));
        exit_code = exit_code_for(e.kind());
        log << "N+ failed: " << e.what() << '\n';
    }

    if (want_minus && u0) {
        try {
            const auto second = second_solution(problem, cfg, u0->field, S);
            timings["nminus_s"] = sw.lap();
            write_field_csv(second.result.field, (fs::path(out_dir) / "u1.csv").string());
            files["u1"] = "u1.csv";
            {
                auto os = open_out(out_dir, "profile.csv");
                os << "r,J_lambda,classification\n";
                for (const auto& pt : second.profile) {
                    os << pt.r << ',' << pt.energy << ',' << to_string(pt.classification) << '\n';
                }
            }
            files["profile"] = "profile.csv";
            m["path"] = {{"epsilon", cfg.bubble.epsilon},
                         {"t_cross", second.crossing.t_cross},
                         {"l0", second.crossing.l0},
                         {"max_profile_energy", second.level.max_energy},
                         {"argmax_r", second.level.argmax_r},
                         {"profile_below_c_lambda", second.level.below}};
            auto j = to_json(second.result);
            j["role"] = "second_solution";
            j["field_file"] = "u1.csv";
            j["nminus"] = to_json(second.report);
            j["palais_smale"] = to_json(palais_smale_check(second.result.trace, cfg.tols.gradient,
                                                           second.report.c_lambda));
            results.push_back(j);
            log << "N- : J(u1) = " << second.result.energy << ", c_lambda = " << second.report.c_lambda
                << ", margin = " << second.report.margin << '\n';
            if (second.result.classification != NehariClass::Nminus) {
                failures.push_back({{"stage", "nminus"},
                                    {"kind", "ClassificationMismatch"},
                                    {"message", "second solution classifies as " +
                                                    to_string(second.result.classification)},
                                    {"exit_code", 3}});
                exit_code = exit_code ? exit_code : 3;
            }
            if (!second.report.below_threshold) {
                const Error e(ErrorKind::EnergyAboveThreshold,
                              "J(u1) is not below c_lambda; compactness is not guaranteed");
                auto f = failure_json("nminus", e);
                f["c_lambda_margin"] = second.report.margin;
                failures.push_back(f);
                exit_code = exit_code ? exit_code : 3;
            }
        } catch (const Error& e) {
            failures.push_back(failure_json("nminus", e));
            exit_code = exit_code ? exit_code : exit_code_for(e.kind());
            log << "N- failed: " << e.what() << '\n';
        }
    }

    m["warnings"] = warnings;
    m["results"] = results;
    m["failures"] = failures;
    m["files"] = files;
    m["status"] = exit_code == 0 ? "ok" : "failed";
    m["exit_code"] = exit_code;
    res.exit_code = exit_code;
    write_json(out_dir, "manifest.json", m);
    timings["total_s"] = total.lap();
    write_json(out_dir, "timings.json", timings);
    return res;
}

CommandResult cmd_solve_from_manifest(const std::string& manifest_path, const std::string& out_dir,
                                      std::ostream& log) {
    std::ifstream in(manifest_path);
    if (!in) throw Error(ErrorKind::Io, "cannot open manifest '" + manifest_path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!j.contains("config")) throw Error(ErrorKind::Config, "manifest has no config snapshot");
    return cmd_solve(config_from_json(j["config"]), out_dir, log);
}

CommandResult cmd_sweep(const ExperimentConfig& cfg, const std::vector<double>& lambdas, bool factors,
                        const std::string& out_dir, std::ostream& log) {
    require_valid_config(cfg);
    validate_branch(cfg.branch);
    ensure_dir(out_dir);
    auto os = open_out(out_dir, "sweep.csv");
    os << "lambda,lambda_over_lambda_0,J_u0,status_u0,J_u1,status_u1,c_lambda,lambda_0,lambda_1,lambda_2,warning\n";

    CommandResult res;
    res.manifest = {{"command", "sweep"}, {"config", to_json(cfg)}, {"rows", ordered_json::array()}};
    if (lambdas.empty()) return res;

    const auto base = DiscreteProblem::build(cfg.params, cfg.forms, cfg.cache_dir);
    const double S = sobolev_for(cfg);
    const auto th = thresholds(cfg.params, base.f_norm, S);
    const bool want_minus = cfg.branch != "nplus";

    for (double value : lambdas) {
        ProblemParams params = cfg.params;
        params.lambda = factors ? value * th.lambda_0 : value;
        const auto problem = base.with_params(params);
        const double cl = c_lambda(params.lambda, params, problem.f_norm, S);
        std::string warning = params.lambda >= th.lambda_0 ? "lambda>=Lambda_0" : "";
        std::string st0 = "skipped", st1 = want_minus ? "skipped" : "not-requested";
        std::optional<double> j0, j1;
        std::optional<SolveResult> u0;
        try {
            if (!(params.lambda > 0.0)) throw Error(ErrorKind::Config, "lambda must be positive");
            u0 = first_solution(problem, cfg);
            j0 = u0->energy;
            st0 = "converged";
        } catch (const Error& e) {
            st0 = std::string(to_string(e.kind()));
        }
        if (want_minus && u0) {
            try {
                const auto second = second_solution(problem, cfg, u0->field, S);
                j1 = second.result.energy;
                st1 = second.report.below_threshold ? "converged" : "converged-above-c_lambda";
            } catch (const Error& e) {
                st1 = std::string(to_string(e.kind()));
            }
        }
        auto num = [](const std::optional<double>& v) {
            std::ostringstream ss;
            ss << std::setprecision(17);
            if (v) ss << *v;
            return ss.str();
        };
        os << params.lambda << ',' << params.lambda / th.lambda_0 << ',' << num(j0) << ',' << st0 << ','
           << num(j1) << ',' << st1 << ',' << cl << ',' << th.lambda_0 << ',' << th.lambda_1 << ','
           << th.lambda_2 << ',' << warning << '\n';
        res.manifest["rows"].push_back({{"lambda", params.lambda},
                                        {"J_u0", j0 ? ordered_json(*j0) : ordered_json(nullptr)},
                                        {"status_u0", st0},
                                        {"J_u1", j1 ? ordered_json(*j1) : ordered_json(nullptr)},
                                        {"status_u1", st1},
                                        {"c_lambda", cl},
                                        {"warning", warning}});
        log << "lambda = " << params.lambda << ": u0 " << st0 << ", u1 " << st1 << '\n';
    }
    return res;
}

CommandResult cmd_sobolev(const ExperimentConfig& cfg, const std::vector<double>& epsilons,
                          const std::string& out_dir, std::ostream& log) {
    require_valid_config(cfg);
    ensure_dir(out_dir);
    const auto problem = DiscreteProblem::build(cfg.params, cfg.forms, cfg.cache_dir);
    const double sn = sobolev_constant_closed_form(cfg.params.dim);
    const double crit = problem.crit();
    auto os = open_out(out_dir, "sobolev.csv");
    os << "epsilon,local_quotient,mixed_quotient,S_N,local_gap,mixed_gap\n";
    CommandResult res;
    res.manifest = {{"command", "sobolev"}, {"config", to_json(cfg)}, {"S_N", sn}, {"rows", ordered_json::array()}};
    for (double eps : epsilons) {
        ExperimentConfig c = cfg;
        c.bubble.epsilon = eps;
        const Field w = normalized_bubble(problem.grid, bubble_spec(c), problem.params);
        const double ql = local_sobolev_quotient(w.values(), problem.forms, crit);
        const double qm = sobolev_quotient(w, problem.forms, crit);
        os << eps << ',' << ql << ',' << qm << ',' << sn << ',' << ql - sn << ',' << qm - sn << '\n';
        res.manifest["rows"].push_back({{"epsilon", eps}, {"local_quotient", ql}, {"mixed_quotient", qm}});
        log << "epsilon = " << eps << ": local " << ql << ", mixed " << qm << ", S_N " << sn << '\n';
    }
    return res;
}

CommandResult cmd_validate(const ExperimentConfig& cfg, std::ostream& log) {
    ProblemParams params = cfg.params;
    if (cfg.lambda_factor) params.lambda = *cfg.lambda_factor;
    const auto rep = validate(params);
    CommandResult res;
    res.manifest = to_json(rep);
    res.exit_code = rep.ok() ? 0 : 2;
    log << res.manifest.dump(2) << '\n';
    return res;
}

}  // namespace nehari
