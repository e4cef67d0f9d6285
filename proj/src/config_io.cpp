#include "nehari/config_io.hpp"

#include "nehari/error.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <list>
#include <sstream>

namespace nehari {

const std::vector<std::pair<std::string, std::vector<std::string>>>& config_schema() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> schema = {
        {"model", {"a", "b", "theta", "p", "s", "dim", "lambda", "lambda_factor"}},
        {"domain", {"kind", "center", "half_widths", "resolution"}},
        {"weight",
         {"kind", "value", "offset", "amplitude", "frequency", "inner", "outer", "radius", "center", "points",
          "values"}},
        {"solver",
         {"seed", "branch", "tol_gradient", "tol_energy", "tol_manifold", "max_iterations", "max_backtracks", "armijo",
          "dense_limit", "cg_max_iterations", "cg_tolerance", "sobolev_constant"}},
        {"bubble", {"epsilon", "cutoff_radius", "center", "l0_max", "b_exponent", "profile_points", "profile_max"}},
        {"forms", {"killing", "face_order", "shell_factor", "tail_radius", "shell_refine", "cache_dir"}},
    };
    return schema;
}

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) return std::string(v);
        return std::nullopt;
    };
}

void validate_branch(const std::string& branch) {
    if (branch != "nplus" && branch != "nminus" && branch != "both") {
        throw Error(ErrorKind::Config, "solver.branch must be nplus, nminus or both, got '" + branch + "'");
    }
}

namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

class Reader {
public:
    Reader(toml::table root, const EnvLookup& env) : root_(std::move(root)), env_(env) { check_known(); }

    const toml::node* find(const std::string& section, const std::string& key) {
        if (env_) {
            if (auto v = env_("NEHARI_" + upper(section) + "_" + upper(key))) {
                toml::table t;
                try {
                    t = toml::parse("v = " + *v);
                } catch (const toml::parse_error&) {
                    t = toml::table{};
                    t.insert("v", *v);
                }
                overrides_.push_back(std::move(t));
                return overrides_.back().get("v");
            }
        }
        const auto* sec = root_.get_as<toml::table>(section);
        return sec ? sec->get(key) : nullptr;
    }

    bool has(const std::string& section, const std::string& key) { return find(section, key) != nullptr; }

    double number(const std::string& section, const std::string& key) {
        auto v = opt_number(section, key);
        if (!v) throw missing(section, key);
        return *v;
    }

    std::optional<double> opt_number(const std::string& section, const std::string& key) {
        const auto* n = find(section, key);
        if (!n) return std::nullopt;
        if (auto d = n->value<double>()) return *d;
        throw wrong_type(section, key, "a number");
    }

    std::optional<std::int64_t> opt_integer(const std::string& section, const std::string& key) {
        const auto* n = find(section, key);
        if (!n) return std::nullopt;
        if (n->is_integer()) return n->value<std::int64_t>();
        throw wrong_type(section, key, "an integer");
    }

    std::int64_t integer(const std::string& section, const std::string& key) {
        auto v = opt_integer(section, key);
        if (!v) throw missing(section, key);
        return *v;
    }

    std::optional<std::string> opt_string(const std::string& section, const std::string& key) {
        const auto* n = find(section, key);
        if (!n) return std::nullopt;
        if (auto s = n->value<std::string>()) return *s;
        throw wrong_type(section, key, "a string");
    }

    std::string string(const std::string& section, const std::string& key) {
        auto v = opt_string(section, key);
        if (!v) throw missing(section, key);
        return *v;
    }

    // Scalars broadcast to `dim` entries.
    std::optional<std::vector<double>> opt_numbers(const std::string& section, const std::string& key, int dim) {
        const auto* n = find(section, key);
        if (!n) return std::nullopt;
        if (auto d = n->value<double>()) return std::vector<double>(dim, *d);
        return to_numbers(n, section, key);
    }

    std::optional<std::vector<std::vector<double>>> opt_points(const std::string& section, const std::string& key) {
        const auto* n = find(section, key);
        if (!n) return std::nullopt;
        const auto* arr = n->as_array();
        if (!arr) throw wrong_type(section, key, "an array of coordinate arrays");
        std::vector<std::vector<double>> out;
        for (const auto& row : *arr) out.push_back(to_numbers(&row, section, key));
        return out;
    }

    static Error missing(const std::string& section, const std::string& key) {
        return Error(ErrorKind::Config, "missing required key '" + section + "." + key + "'");
    }

private:
    static Error wrong_type(const std::string& section, const std::string& key, const std::string& what) {
        return Error(ErrorKind::Config, "key '" + section + "." + key + "' must be " + what);
    }

    static std::vector<double> to_numbers(const toml::node* n, const std::string& section, const std::string& key) {
        const auto* arr = n->as_array();
        if (!arr) throw wrong_type(section, key, "a number or an array of numbers");
        std::vector<double> out;
        for (const auto& el : *arr) {
            auto d = el.value<double>();
            if (!d) throw wrong_type(section, key, "an array of numbers");
            out.push_back(*d);
        }
        return out;
    }

    void check_known() const {
        const auto& schema = config_schema();
        for (const auto& [name, node] : root_) {
            const std::string sec(name.str());
            auto it = std::find_if(schema.begin(), schema.end(), [&](const auto& e) { return e.first == sec; });
            if (it == schema.end()) throw Error(ErrorKind::Config, "unknown section '" + sec + "'");
            const auto* tbl = node.as_table();
            if (!tbl) throw Error(ErrorKind::Config, "'" + sec + "' must be a table");
            for (const auto& [k, v] : *tbl) {
                const std::string key(k.str());
                if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
                    throw Error(ErrorKind::Config, "unknown key '" + sec + "." + key + "'");
                }
            }
        }
    }

    toml::table root_;
    EnvLookup env_;
    std::list<toml::table> overrides_;  // stable addresses for returned nodes
};

WeightDescriptor read_weight(Reader& r, int dim) {
    WeightDescriptor w;
    w.kind = weight_kind_from_string(r.string("weight", "kind"));
    if (auto c = r.opt_numbers("weight", "center", dim)) w.center = *c;
    switch (w.kind) {
    case WeightKind::Constant:
        w.value = r.number("weight", "value");
        break;
    case WeightKind::SeparableCosine:
        w.offset = r.number("weight", "offset");
        w.amplitude = r.number("weight", "amplitude");
        w.frequency = r.number("weight", "frequency");
        break;
    case WeightKind::RadialStep:
        w.inner = r.number("weight", "inner");
        w.outer = r.number("weight", "outer");
        w.radius = r.number("weight", "radius");
        break;
    case WeightKind::Tabulated: {
        auto pts = r.opt_points("weight", "points");
        if (!pts) throw Reader::missing("weight", "points");
        w.points = *pts;
        auto vals = r.opt_numbers("weight", "values", 1);
        if (!vals) throw Reader::missing("weight", "values");
        w.values = *vals;
        break;
    }
    }
    return w;
}

KillingMethod killing_from_string(const std::string& s) {
    if (s == "faces") return KillingMethod::BoundaryFaces;
    if (s == "shell") return KillingMethod::ShellQuadrature;
    throw Error(ErrorKind::Config, "forms.killing must be 'faces' or 'shell', got '" + s + "'");
}

std::string killing_to_string(KillingMethod m) { return m == KillingMethod::BoundaryFaces ? "faces" : "shell"; }

}  // namespace

ExperimentConfig parse_config(const std::string& text, const EnvLookup& env) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "TOML parse error: " << e.description() << " at line " << e.source().begin.line;
        throw Error(ErrorKind::Config, msg.str());
    }
    Reader r(std::move(root), env);
    ExperimentConfig cfg;
    auto& pp = cfg.params;

    pp.a = r.number("model", "a");
    pp.b = r.number("model", "b");
    pp.theta = r.number("model", "theta");
    pp.p = r.number("model", "p");
    pp.s = r.number("model", "s");
    pp.dim = static_cast<int>(r.integer("model", "dim"));
    auto lambda = r.opt_number("model", "lambda");
    cfg.lambda_factor = r.opt_number("model", "lambda_factor");
    if (lambda && cfg.lambda_factor) {
        throw Error(ErrorKind::Config, "set only one of 'model.lambda' and 'model.lambda_factor'");
    }
    if (!lambda && !cfg.lambda_factor) throw Reader::missing("model", "lambda");
    pp.lambda = lambda.value_or(0.0);

    const int dim = pp.dim;
    if (dim < 1) throw Error(ErrorKind::Config, "model.dim must be positive");
    if (auto kind = r.opt_string("domain", "kind"); kind && *kind != "box") {
        throw Error(ErrorKind::Config, "domain.kind must be 'box'");
    }
    auto hw = r.opt_numbers("domain", "half_widths", dim);
    if (!hw) throw Reader::missing("domain", "half_widths");
    pp.domain.half_widths = *hw;
    pp.domain.center = r.opt_numbers("domain", "center", dim).value_or(std::vector<double>(dim, 0.0));
    auto res = r.opt_numbers("domain", "resolution", dim);
    if (!res) throw Reader::missing("domain", "resolution");
    for (double v : *res) {
        if (v != static_cast<int>(v)) throw Error(ErrorKind::Config, "domain.resolution must be integral");
        pp.domain.resolution.push_back(static_cast<int>(v));
    }
    if (pp.domain.center.size() != pp.domain.half_widths.size() ||
        pp.domain.resolution.size() != pp.domain.half_widths.size()) {
        throw Error(ErrorKind::Config, "domain arrays must have one entry per axis");
    }

    pp.weight = read_weight(r, dim);

    if (auto v = r.opt_integer("solver", "seed")) cfg.seed = static_cast<std::uint64_t>(*v);
    if (auto v = r.opt_string("solver", "branch")) cfg.branch = *v;
    validate_branch(cfg.branch);
    auto& t = cfg.tols;
    t.gradient = r.opt_number("solver", "tol_gradient").value_or(t.gradient);
    t.energy = r.opt_number("solver", "tol_energy").value_or(t.energy);
    t.on_manifold = r.opt_number("solver", "tol_manifold").value_or(t.on_manifold);
    t.max_iterations = static_cast<int>(r.opt_integer("solver", "max_iterations").value_or(t.max_iterations));
    t.max_backtracks = static_cast<int>(r.opt_integer("solver", "max_backtracks").value_or(t.max_backtracks));
    t.armijo = r.opt_number("solver", "armijo").value_or(t.armijo);
    t.dense_limit = static_cast<std::size_t>(
        r.opt_integer("solver", "dense_limit").value_or(static_cast<std::int64_t>(t.dense_limit)));
    t.cg_max_iterations = static_cast<int>(r.opt_integer("solver", "cg_max_iterations").value_or(t.cg_max_iterations));
    t.cg_tolerance = r.opt_number("solver", "cg_tolerance").value_or(t.cg_tolerance);
    cfg.sobolev_constant = r.opt_number("solver", "sobolev_constant");

    auto& bb = cfg.bubble;
    bb.epsilon = r.opt_number("bubble", "epsilon").value_or(bb.epsilon);
    bb.cutoff_radius = r.opt_number("bubble", "cutoff_radius");
    if (auto c = r.opt_numbers("bubble", "center", dim)) bb.center = *c;
    bb.l0_max = r.opt_number("bubble", "l0_max").value_or(bb.l0_max);
    bb.b_exponent = r.opt_number("bubble", "b_exponent");
    bb.profile_points = static_cast<int>(r.opt_integer("bubble", "profile_points").value_or(bb.profile_points));
    bb.profile_max = r.opt_number("bubble", "profile_max").value_or(bb.profile_max);
    if (bb.b_exponent) pp.b = std::pow(bb.epsilon, *bb.b_exponent);

    auto& fo = cfg.forms;
    if (auto k = r.opt_string("forms", "killing")) fo.killing = killing_from_string(*k);
    fo.face_order = static_cast<int>(r.opt_integer("forms", "face_order").value_or(fo.face_order));
    fo.shell_factor = r.opt_number("forms", "shell_factor").value_or(fo.shell_factor);
    fo.tail_radius = r.opt_number("forms", "tail_radius").value_or(fo.tail_radius);
    fo.shell_refine = static_cast<int>(r.opt_integer("forms", "shell_refine").value_or(fo.shell_refine));
    cfg.cache_dir = r.opt_string("forms", "cache_dir").value_or("");
    return cfg;
}

ExperimentConfig load_config(const std::string& path, const EnvLookup& env) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), env);
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    using nlohmann::ordered_json;
    const auto& pp = c.params;
    auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    ordered_json j;
    j["model"] = {{"a", pp.a},         {"b", pp.b},   {"theta", pp.theta},   {"p", pp.p},
                  {"s", pp.s},         {"dim", pp.dim}, {"lambda", pp.lambda}, {"lambda_factor", opt(c.lambda_factor)}};
    j["domain"] = {{"kind", "box"},
                   {"center", pp.domain.center},
                   {"half_widths", pp.domain.half_widths},
                   {"resolution", pp.domain.resolution}};
    const auto& w = pp.weight;
    j["weight"] = {{"kind", to_string(w.kind)}, {"value", w.value},   {"offset", w.offset}, {"amplitude", w.amplitude},
                   {"frequency", w.frequency},  {"inner", w.inner},   {"outer", w.outer},   {"radius", w.radius},
                   {"center", w.center},        {"points", w.points}, {"values", w.values}};
    const auto& t = c.tols;
    j["solver"] = {{"seed", c.seed},
                   {"branch", c.branch},
                   {"tol_gradient", t.gradient},
                   {"tol_energy", t.energy},
                   {"tol_manifold", t.on_manifold},
                   {"max_iterations", t.max_iterations},
                   {"max_backtracks", t.max_backtracks},
                   {"armijo", t.armijo},
                   {"dense_limit", t.dense_limit},
                   {"cg_max_iterations", t.cg_max_iterations},
                   {"cg_tolerance", t.cg_tolerance},
                   {"sobolev_constant", opt(c.sobolev_constant)}};
    const auto& b = c.bubble;
    j["bubble"] = {{"epsilon", b.epsilon},
                   {"cutoff_radius", opt(b.cutoff_radius)},
                   {"center", b.center},
                   {"l0_max", b.l0_max},
                   {"b_exponent", opt(b.b_exponent)},
                   {"profile_points", b.profile_points},
                   {"profile_max", b.profile_max}};
    const auto& f = c.forms;
    j["forms"] = {{"killing", killing_to_string(f.killing)}, {"face_order", f.face_order},
                  {"shell_factor", f.shell_factor},          {"tail_radius", f.tail_radius},
                  {"shell_refine", f.shell_refine},          {"cache_dir", c.cache_dir}};
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    auto opt = [](const nlohmann::json& v) { return v.is_null() ? std::optional<double>{} : v.get<double>(); };
    try {
        ExperimentConfig c;
        auto& pp = c.params;
        const auto& m = j.at("model");
        pp.a = m.at("a");
        pp.b = m.at("b");
        pp.theta = m.at("theta");
        pp.p = m.at("p");
        pp.s = m.at("s");
        pp.dim = m.at("dim");
        pp.lambda = m.at("lambda");
        c.lambda_factor = opt(m.at("lambda_factor"));
        const auto& d = j.at("domain");
        pp.domain.center = d.at("center").get<std::vector<double>>();
        pp.domain.half_widths = d.at("half_widths").get<std::vector<double>>();
        pp.domain.resolution = d.at("resolution").get<std::vector<int>>();
        const auto& w = j.at("weight");
        pp.weight.kind = weight_kind_from_string(w.at("kind"));
        pp.weight.value = w.at("value");
        pp.weight.offset = w.at("offset");
        pp.weight.amplitude = w.at("amplitude");
        pp.weight.frequency = w.at("frequency");
        pp.weight.inner = w.at("inner");
        pp.weight.outer = w.at("outer");
        pp.weight.radius = w.at("radius");
        pp.weight.center = w.at("center").get<std::vector<double>>();
        pp.weight.points = w.at("points").get<std::vector<std::vector<double>>>();
        pp.weight.values = w.at("values").get<std::vector<double>>();
        const auto& s = j.at("solver");
        c.seed = s.at("seed");
        c.branch = s.at("branch");
        c.tols.gradient = s.at("tol_gradient");
        c.tols.energy = s.at("tol_energy");
        c.tols.on_manifold = s.at("tol_manifold");
        c.tols.max_iterations = s.at("max_iterations");
        c.tols.max_backtracks = s.at("max_backtracks");
        c.tols.armijo = s.at("armijo");
        c.tols.dense_limit = s.at("dense_limit");
        c.tols.cg_max_iterations = s.at("cg_max_iterations");
        c.tols.cg_tolerance = s.at("cg_tolerance");
        c.sobolev_constant = opt(s.at("sobolev_constant"));
        const auto& b = j.at("bubble");
        c.bubble.epsilon = b.at("epsilon");
        c.bubble.cutoff_radius = opt(b.at("cutoff_radius"));
        c.bubble.center = b.at("center").get<std::vector<double>>();
        c.bubble.l0_max = b.at("l0_max");
        c.bubble.b_exponent = opt(b.at("b_exponent"));
        c.bubble.profile_points = b.at("profile_points");
        c.bubble.profile_max = b.at("profile_max");
        const auto& f = j.at("forms");
        c.forms.killing = killing_from_string(f.at("killing"));
        c.forms.face_order = f.at("face_order");
        c.forms.shell_factor = f.at("shell_factor");
        c.forms.tail_radius = f.at("tail_radius");
        c.forms.shell_refine = f.at("shell_refine");
        c.cache_dir = f.at("cache_dir");
        validate_branch(c.branch);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("malformed config snapshot: ") + e.what());
    }
}

}  // namespace nehari
