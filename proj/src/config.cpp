#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "pinv/cli.hpp"
#include "pinv/io.hpp"

namespace pinv {

using nlohmann::json;

Experiment parse_experiment(const std::string& name) {
    if (name == "forward") return Experiment::forward;
    if (name == "linearize") return Experiment::linearize;
    if (name == "constants") return Experiment::constants;
    if (name == "reconstruct") return Experiment::reconstruct;
    if (name == "uniqueness") return Experiment::uniqueness;
    if (name == "stability") return Experiment::stability;
    throw ConfigError(fmt::format("unknown experiment '{}'", name));
}

const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::forward: return "forward";
        case Experiment::linearize: return "linearize";
        case Experiment::constants: return "constants";
        case Experiment::reconstruct: return "reconstruct";
        case Experiment::uniqueness: return "uniqueness";
        case Experiment::stability: return "stability";
    }
    return "?";
}

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError(fmt::format("'{}' must be an object", where));
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.count(k)) throw ConfigError(fmt::format("unknown key '{}{}'", where.empty() ? "" : where + ".", k));
    }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("'{}{}' has the wrong type", where.empty() ? "" : where + ".", key));
    }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(fmt::format("missing key '{}{}'", where.empty() ? "" : where + ".", key));
    return get<T>(obj, key, where, T{});
}

void positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(fmt::format("{} must be positive and finite (got {})", what, v));
}

TermSpec parse_term(const json& j, const std::string& where) {
    only_keys(j, where, {"name", "params"});
    TermSpec t;
    t.name = require<std::string>(j, "name", where);
    if (j.contains("params")) {
        if (!j["params"].is_object()) throw ConfigError(fmt::format("'{}.params' must be an object", where));
        for (const auto& [k, v] : j["params"].items()) {
            if (!v.is_number()) throw ConfigError(fmt::format("'{}.params.{}' must be a number", where, k));
            t.params[k] = v.get<double>();
        }
    }
    try {
        (void)builtin_family(t.name, t.params);
    } catch (const InvalidArgument& e) {
        throw ConfigError(fmt::format("{}: {}", where, e.what()));
    }
    return t;
}

json term_json(const TermSpec& t) {
    json p = json::object();
    for (const auto& [k, v] : t.params) p[k] = v;
    return {{"name", t.name}, {"params", p}};
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
    only_keys(j, "", {"name", "description", "experiment", "grid", "nonlinearity", "chi", "r", "n_lambda", "scheme",
                      "tolerances", "horizon", "seed", "output", "alpha", "threads", "forward", "linearize",
                      "constants", "reconstruct", "uniqueness", "stability"});
    ScenarioConfig c;
    c.name = require<std::string>(j, "name", "");
    if (c.name.empty()) throw ConfigError("'name' must be nonempty");
    c.description = get<std::string>(j, "description", "", "");
    c.experiment = parse_experiment(require<std::string>(j, "experiment", ""));

    const json& g = j.contains("grid") ? j["grid"] : throw ConfigError("missing key 'grid'");
    only_keys(g, "grid", {"dim", "extents", "nx", "nt", "T"});
    c.grid.dim = require<int>(g, "dim", "grid");
    c.grid.extents = require<std::vector<double>>(g, "extents", "grid");
    c.grid.nx = require<std::vector<int>>(g, "nx", "grid");
    c.grid.nt = require<int>(g, "nt", "grid");
    c.grid.T = require<double>(g, "T", "grid");
    GridPtr grid;
    try {
        grid = SpaceTimeGrid::build(c.grid);
    } catch (const InvalidArgument& e) {
        throw ConfigError(fmt::format("grid: {}", e.what()));
    }

    if (!j.contains("nonlinearity")) throw ConfigError("missing key 'nonlinearity'");
    c.nonlinearity = parse_term(j["nonlinearity"], "nonlinearity");

    if (j.contains("chi")) {
        const json& ch = j["chi"];
        only_keys(ch, "chi", {"delta1", "delta2", "epsilon"});
        c.delta1 = get<double>(ch, "delta1", "chi", c.delta1);
        c.delta2 = get<double>(ch, "delta2", "chi", c.delta2);
        c.epsilon = get<double>(ch, "epsilon", "chi", c.epsilon);
    }
    c.r = get<double>(j, "r", "", c.r);
    c.n_lambda = get<int>(j, "n_lambda", "", c.n_lambda);
    try {
        c.scheme = parse_scheme(get<std::string>(j, "scheme", "", "implicit_euler"));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        only_keys(t, "tolerances", {"newton", "max_newton", "max_halvings", "blowup_cap", "margin"});
        c.solver.newton_tol = get<double>(t, "newton", "tolerances", c.solver.newton_tol);
        c.solver.max_newton = get<int>(t, "max_newton", "tolerances", c.solver.max_newton);
        c.solver.max_halvings = get<int>(t, "max_halvings", "tolerances", c.solver.max_halvings);
        c.solver.blowup_cap = get<double>(t, "blowup_cap", "tolerances", c.solver.blowup_cap);
        c.margin = get<double>(t, "margin", "tolerances", c.margin);
    }
    c.horizon = get<double>(j, "horizon", "", c.grid.T);
    c.seed = get<std::uint64_t>(j, "seed", "", 0);
    c.output = get<std::string>(j, "output", "", "");
    c.alpha = get<double>(j, "alpha", "", c.alpha);
    c.threads = get<int>(j, "threads", "", 1);

    positive(c.solver.newton_tol, "tolerances.newton");
    positive(c.solver.blowup_cap, "tolerances.blowup_cap");
    if (c.solver.max_newton < 1 || c.solver.max_halvings < 0) throw ConfigError("Newton iteration limits must be positive");
    if (!(c.margin >= 0.0 && c.margin < 1.0)) throw ConfigError("tolerances.margin must lie in [0, 1)");
    positive(c.r, "r");
    positive(c.delta2, "chi.delta2");
    if (!(c.epsilon >= 0.0)) throw ConfigError("chi.epsilon must be nonnegative");
    if (c.n_lambda < 5 || c.n_lambda % 2 == 0) throw ConfigError(fmt::format("n_lambda = {} must be odd and >= 5", c.n_lambda));
    if (!(c.horizon > 0.0) || c.horizon > c.grid.T * (1.0 + 1e-12)) {
        throw ConfigError(fmt::format("horizon = {} must satisfy 0 < horizon <= T = {}", c.horizon, c.grid.T));
    }
    if (!(c.delta1 > 0.0) || !(c.delta1 < c.horizon)) {
        throw ConfigError(fmt::format("chi.delta1 = {} must satisfy 0 < delta1 < horizon = {}", c.delta1, c.horizon));
    }
    if (grid->dt() > 0.25 * c.delta1) {
        throw ConfigError(fmt::format("dt = {} must not exceed delta1/4 = {}", grid->dt(), 0.25 * c.delta1));
    }
    if (c.threads < 1) throw ConfigError("threads must be >= 1");

    const char* sec = to_string(c.experiment);
    c.section = j.contains(sec) ? j[sec] : json::object();
    if (!c.section.is_object()) throw ConfigError(fmt::format("'{}' must be an object", sec));

    c.effective = {{"name", c.name},
                   {"experiment", sec},
                   {"grid", {{"dim", c.grid.dim}, {"extents", c.grid.extents}, {"nx", c.grid.nx}, {"nt", c.grid.nt}, {"T", c.grid.T}}},
                   {"nonlinearity", term_json(c.nonlinearity)},
                   {"chi", {{"delta1", c.delta1}, {"delta2", c.delta2}, {"epsilon", c.epsilon}}},
                   {"r", c.r},
                   {"n_lambda", c.n_lambda},
                   {"scheme", to_string(c.scheme)},
                   {"tolerances",
                    {{"newton", c.solver.newton_tol},
                     {"max_newton", c.solver.max_newton},
                     {"max_halvings", c.solver.max_halvings},
                     {"blowup_cap", c.solver.blowup_cap},
                     {"margin", c.margin}}},
                   {"horizon", c.horizon},
                   {"seed", c.seed},
                   {"alpha", c.alpha},
                   {sec, c.section}};
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    json j;
    try {
        j = json::parse(is, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config '{}' does not parse: {}", path.string(), e.what()));
    }
    return parse_config(j);
}

std::string config_hash(const ScenarioConfig& c) { return sha256_hex(c.effective.dump()); }

std::filesystem::path resolve_output(const ScenarioConfig& c, const RunOverrides& o) {
    if (o.output) return *o.output;
    const char* env = std::getenv("PINV_OUTPUT_ROOT");
    const std::filesystem::path root = env && *env ? env : "runs";
    if (!c.output.empty()) {
        const std::filesystem::path p(c.output);
        return p.is_absolute() ? p : root / p;
    }
    return root / c.name;
}

std::vector<ScenarioListing> list_scenarios(const std::filesystem::path& dir) {
    std::vector<ScenarioListing> out;
    if (!std::filesystem::is_directory(dir)) throw ConfigError(fmt::format("scenario directory '{}' not found", dir.string()));
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        ScenarioListing l{entry.path(), "", "", ""};
        try {
            const auto c = load_config(entry.path());
            l.name = c.name;
            l.experiment = to_string(c.experiment);
            l.description = c.description;
        } catch (const Error& e) {
            l.name = entry.path().stem().string();
            l.experiment = "invalid";
            l.description = e.what();
        }
        out.push_back(std::move(l));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
}

}  // namespace pinv
