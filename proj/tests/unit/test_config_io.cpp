#include <doctest.h>

#include "nehari/config_io.hpp"
#include "nehari/error.hpp"

#include <map>
#include <string>

using namespace nehari;

namespace {

const char* kBase = R"(
[model]
a = 1.0
b = 0.5
theta = 2.0
p = 1.5
s = 0.5
dim = 3
lambda = 0.2

[domain]
half_widths = 1.0
resolution = 5

[weight]
kind = "constant"
value = 1.0
)";

EnvLookup no_env() {
    return [](const std::string&) { return std::optional<std::string>{}; };
}

EnvLookup map_env(std::map<std::string, std::string> vars) {
    return [vars](const std::string& k) -> std::optional<std::string> {
        auto it = vars.find(k);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

std::string config_error(const std::string& text, const EnvLookup& env) {
    try {
        parse_config(text, env);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return e.what();
    }
    FAIL("expected a Config error");
    return {};
}

}  // namespace

TEST_CASE("valid config parses") {
    const auto cfg = parse_config(kBase, no_env());
    CHECK(cfg.params.b == 0.5);
    CHECK(cfg.params.lambda == 0.2);
    CHECK(cfg.params.dim == 3);
    CHECK(cfg.params.domain.resolution == std::vector<int>{5, 5, 5});
    CHECK(cfg.params.domain.half_widths == std::vector<double>{1.0, 1.0, 1.0});
    CHECK_FALSE(cfg.lambda_factor.has_value());
    CHECK(cfg.branch == "both");
}

TEST_CASE("missing and unknown keys are named") {
    std::string text = kBase;
    text.replace(text.find("theta = 2.0\n"), 12, "");
    CHECK(config_error(text, no_env()).find("model.theta") != std::string::npos);

    CHECK(config_error(std::string(kBase) + "\n[solver]\nbogus = 1\n", no_env()).find("bogus") != std::string::npos);
    CHECK(config_error(std::string(kBase) + "\n[extra]\nx = 1\n", no_env()).find("extra") != std::string::npos);

    std::string both = kBase;
    both += "";
    both.replace(both.find("lambda = 0.2"), 12, "lambda = 0.2\nlambda_factor = 0.1");
    config_error(both, no_env());

    CHECK(config_error(std::string(kBase) + "\n[solver]\nbranch = \"sideways\"\n", no_env()).find("sideways") !=
          std::string::npos);
}

TEST_CASE("environment overrides file values") {
    const auto cfg = parse_config(kBase, map_env({{"NEHARI_MODEL_B", "0.25"}, {"NEHARI_SOLVER_BRANCH", "nplus"},
                                                  {"NEHARI_SOLVER_SEED", "42"}}));
    CHECK(cfg.params.b == 0.25);
    CHECK(cfg.branch == "nplus");
    CHECK(cfg.seed == 42);
    config_error(kBase, map_env({{"NEHARI_MODEL_B", "\"soft\""}}));
}

TEST_CASE("bubble exponent couples b to epsilon") {
    const auto cfg = parse_config(std::string(kBase) + "\n[bubble]\nepsilon = 0.1\nb_exponent = 2.0\n", no_env());
    CHECK(cfg.params.b == doctest::Approx(0.01));
}

TEST_CASE("JSON snapshot round trip") {
    const auto cfg = parse_config(std::string(kBase) + "\n[solver]\nseed = 11\ntol_gradient = 1e-7\n", no_env());
    const auto j = to_json(cfg);
    const auto back = config_from_json(nlohmann::json::parse(j.dump()));
    CHECK(to_json(back).dump() == j.dump());
    CHECK(back.seed == 11);
    CHECK(back.tols.gradient == 1e-7);
}

TEST_CASE("schema lists every section") {
    std::vector<std::string> names;
    for (const auto& [section, keys] : config_schema()) names.push_back(section);
    for (const char* s : {"model", "domain", "weight", "solver", "bubble", "forms"}) {
        CHECK(std::find(names.begin(), names.end(), s) != names.end());
    }
}
