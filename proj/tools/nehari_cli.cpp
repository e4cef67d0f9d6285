#include "nehari/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace nehari;

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::Config, flag + " expects comma-separated numbers, got '" + item + "'");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nehari-manifold solver for a mixed local-nonlocal Kirchhoff problem"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", branch, manifest, triple, lambdas, factors;
    std::string epsilons = "0.4,0.2,0.1";
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* opt = sub->add_option("--config", config_path, "TOML config file");
        if (need_config) opt->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "64-bit seed overriding solver.seed");
    };

    auto* fiber = app.add_subcommand("fiber", "fibering report and bifurcation table");
    add_common(fiber, true);
    fiber->add_option("--triple", triple, "scalar mode: A,B,C");

    auto* solve = app.add_subcommand("solve", "first and second solutions");
    add_common(solve, false);
    solve->add_option("--branch", branch, "nplus, nminus or both")->check(CLI::IsMember({"nplus", "nminus", "both"}));
    solve->add_option("--manifest", manifest, "re-run from a manifest's config snapshot");

    auto* sweep = app.add_subcommand("sweep", "first/second solution energies over a lambda grid");
    add_common(sweep, true);
    sweep->add_option("--branch", branch, "nplus, nminus or both")->check(CLI::IsMember({"nplus", "nminus", "both"}));
    auto* lam_opt = sweep->add_option("--lambdas", lambdas, "comma-separated lambda values");
    sweep->add_option("--lambda-factors", factors, "comma-separated multiples of Lambda_0")->excludes(lam_opt);

    auto* sobolev = app.add_subcommand("sobolev", "bubble quotients against S_N");
    add_common(sobolev, true);
    sobolev->add_option("--epsilons", epsilons, "comma-separated bubble scales");

    auto* validate_cmd = app.add_subcommand("validate", "check parameter admissibility");
    add_common(validate_cmd, true);

    CLI11_PARSE(app, argc, argv);

    try {
        CommandResult res;
        auto load = [&] {
            ExperimentConfig cfg = load_config(config_path);
            if (seed != 0) cfg.seed = seed;
            if (!branch.empty()) cfg.branch = branch;
            return cfg;
        };
        if (fiber->parsed()) {
            std::optional<FiberScalars> sc;
            if (!triple.empty()) {
                const auto v = parse_list(triple, "--triple");
                if (v.size() != 3) throw Error(ErrorKind::Config, "--triple expects A,B,C");
                sc = FiberScalars{v[0], v[1], v[2]};
            }
            res = cmd_fiber(load(), sc, out_dir, std::cout);
        } else if (solve->parsed()) {
            if (!manifest.empty()) {
                res = cmd_solve_from_manifest(manifest, out_dir, std::cerr);
            } else {
                if (config_path.empty()) throw Error(ErrorKind::Config, "solve needs --config or --manifest");
                res = cmd_solve(load(), out_dir, std::cerr);
            }
            std::cout << res.manifest.dump(2) << '\n';
        } else if (sweep->parsed()) {
            const bool use_factors = !factors.empty();
            res = cmd_sweep(load(), parse_list(use_factors ? factors : lambdas, "--lambdas"), use_factors, out_dir,
                            std::cerr);
        } else if (sobolev->parsed()) {
            res = cmd_sobolev(load(), parse_list(epsilons, "--epsilons"), out_dir, std::cout);
        } else if (validate_cmd->parsed()) {
            res = cmd_validate(load(), std::cout);
        }
        return res.exit_code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
