#include <doctest.h>

#include "nehari/config_io.hpp"
#include "nehari/error.hpp"
#include "nehari/runner.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nehari;
namespace fs = std::filesystem;

namespace {

EnvLookup no_env() {
    return [](const std::string&) { return std::optional<std::string>{}; };
}

ExperimentConfig small(int res, double b = 1.0, std::string weight = "value = 1.0") {
    std::ostringstream t;
    t << "[model]\na = 1.0\nb = " << b << "\ntheta = 2.0\np = 1.5\ns = 0.5\ndim = 3\nlambda_factor = 0.1\n"
      << "[domain]\nhalf_widths = 1.0\nresolution = " << res << "\n"
      << "[weight]\nkind = \"constant\"\n" << weight << "\n"
      << "[solver]\nseed = 7\n";
    return parse_config(t.str(), no_env());
}

std::string tmp_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("nehari_runner_" + name);
    fs::remove_all(d);
    return d.string();
}

std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("exit codes") {
    CHECK(exit_code_for(ErrorKind::Config) == 2);
    CHECK(exit_code_for(ErrorKind::BubbleOutsideDomain) == 2);
    CHECK(exit_code_for(ErrorKind::EnergyAboveThreshold) == 3);
    CHECK(exit_code_for(ErrorKind::ProjectionLost) == 3);
    CHECK(exit_code_for(ErrorKind::NonnegativityFailed) == 4);
    CHECK(exit_code_for(ErrorKind::Io) == 1);
}

TEST_CASE("fiber in scalar mode") {
    auto cfg = small(3);
    cfg.lambda_factor.reset();
    cfg.params.lambda = 0.5;
    std::ostringstream log;
    const auto dir = tmp_dir("fiber_scalar");
    const auto r = cmd_fiber(cfg, FiberScalars{1.0, 1.0, 1.0}, dir, log);
    CHECK(r.exit_code == 0);
    CHECK(double(r.manifest["report"]["t_root"]) == doctest::Approx(0.8436116).epsilon(1e-6));
    CHECK(double(r.manifest["report"]["lambda_u"]) == doctest::Approx(1.107).epsilon(1e-3));
    CHECK(fs::exists(fs::path(dir) / "fiber_report.json"));
    const auto csv = lines(fs::path(dir) / "bifurcation.csv");
    CHECK(csv.size() == 41);
    CHECK(csv.front() == "lambda,t_plus,t_minus,J_plus,J_minus");
}

TEST_CASE("fiber in field mode with a negative weight") {
    const auto cfg = small(5, 1.0, "value = -1.0");
    std::ostringstream log;
    const auto r = cmd_fiber(cfg, std::nullopt, tmp_dir("fiber_field"), log);
    CHECK(r.manifest["mode"] == "field");
    CHECK(r.manifest["report"]["lambda_u"].is_null());
    CHECK(double(r.manifest["report"]["scalars"]["B"]) < 0.0);
}

TEST_CASE("sweep") {
    auto cfg = small(5);
    cfg.branch = "nplus";
    std::ostringstream log;
    {
        const auto dir = tmp_dir("sweep_empty");
        cmd_sweep(cfg, {}, true, dir, log);
        const auto csv = lines(fs::path(dir) / "sweep.csv");
        REQUIRE(csv.size() == 1);
        CHECK(csv[0] == "lambda,lambda_over_lambda_0,J_u0,status_u0,J_u1,status_u1,c_lambda,lambda_0,lambda_1,"
                        "lambda_2,warning");
    }
    const auto dir = tmp_dir("sweep_five");
    const auto r = cmd_sweep(cfg, {0.02, 0.05, 0.1, 0.2, 0.4}, true, dir, log);
    CHECK(lines(fs::path(dir) / "sweep.csv").size() == 6);
    for (const auto& row : r.manifest["rows"]) {
        CHECK(row["status_u0"] == "converged");
        CHECK(double(row["J_u0"]) < 0.0);
        CHECK(row["status_u1"] == "not-requested");
    }
    const auto over = cmd_sweep(cfg, {2.0}, true, tmp_dir("sweep_over"), log);
    CHECK(over.manifest["rows"][0]["warning"] == "lambda>=Lambda_0");
}

TEST_CASE("sobolev table") {
    const auto cfg = small(9);
    std::ostringstream log;
    const auto dir = tmp_dir("sobolev");
    const auto r = cmd_sobolev(cfg, {0.4, 0.2}, dir, log);
    for (const auto& row : r.manifest["rows"]) {
        CHECK(double(row["local_quotient"]) <= double(row["mixed_quotient"]));
    }
    CHECK(lines(fs::path(dir) / "sobolev.csv").size() == 3);
    try {
        cmd_sobolev(cfg, {1.5}, tmp_dir("sobolev_bad"), log);
        FAIL("expected an error for epsilon beyond the cutoff");
    } catch (const Error& e) {
        CHECK(exit_code_for(e.kind()) == 2);
    }
}

TEST_CASE("solve with the first branch only") {
    auto cfg = small(5);
    cfg.branch = "nplus";
    std::ostringstream log;
    const auto dir = tmp_dir("solve_nplus");
    const auto r = cmd_solve(cfg, dir, log);
    CHECK(r.exit_code == 0);
    REQUIRE(r.manifest["results"].size() == 1);
    CHECK(r.manifest["results"][0]["role"] == "first_solution");
    CHECK_FALSE(r.manifest.contains("path"));
    CHECK(fs::exists(fs::path(dir) / "u0.csv"));
    CHECK_FALSE(fs::exists(fs::path(dir) / "u1.csv"));
    CHECK(fs::exists(fs::path(dir) / "timings.json"));

    const auto again = tmp_dir("solve_nplus_again");
    cmd_solve_from_manifest((fs::path(dir) / "manifest.json").string(), again, log);
    CHECK(slurp(fs::path(dir) / "manifest.json") == slurp(fs::path(again) / "manifest.json"));
    CHECK(slurp(fs::path(dir) / "u0.csv") == slurp(fs::path(again) / "u0.csv"));
}

TEST_CASE("validate reports violations") {
    auto cfg = small(3);
    std::ostringstream log;
    CHECK(cmd_validate(cfg, log).exit_code == 0);
    cfg.params.p = 2.5;
    CHECK(cmd_validate(cfg, log).exit_code == 2);
}
