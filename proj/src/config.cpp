#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ifcable/errors.hpp"
#include "ifcable/solver.hpp"

namespace ifcable::cli {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config validation: " + path + ": " + what);
}

void expect_object(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "must be a JSON object");
}

void reject_unknown(const ordered_json& j, const std::string& path,
                    const std::set<std::string>& known) {
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) fail(path + "." + key, "unknown field");
}

double get_num(const ordered_json& j, const std::string& path, const std::string& key,
               double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) fail(path + "." + key, "must be a number");
    return j.at(key).get<double>();
}

double require_num(const ordered_json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) fail(path + "." + key, "required field is missing");
    if (!j.at(key).is_number()) fail(path + "." + key, "must be a number");
    return j.at(key).get<double>();
}

long get_int(const ordered_json& j, const std::string& path, const std::string& key,
             long fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) fail(path + "." + key, "must be an integer");
    return j.at(key).get<long>();
}

std::string get_str(const ordered_json& j, const std::string& path, const std::string& key,
                    const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) fail(path + "." + key, "must be a string");
    return j.at(key).get<std::string>();
}

std::vector<double> get_num_list(const ordered_json& j, const std::string& path,
                                 const std::string& key, std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_array()) fail(path + "." + key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) fail(path + "." + key, "must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

const std::set<std::string> kStudyKinds = {"equilibrium", "admissible",    "rectangle", "simulate",
                                           "average-check", "oscillatory", "sweep"};
const std::set<std::string> kSystems = {"full",            "centered",  "pas", "linear_error",
                                        "nonlinear_error", "remainder"};

void validate_study(const RunConfig& cfg);

}  // namespace

RunConfig parse_config(const ordered_json& root) {
    expect_object(root, "config");
    reject_unknown(root, "config",
                   {"model", "source", "grid", "time", "study", "output", "threads", "seed"});
    RunConfig cfg;

    if (!root.contains("model")) fail("model", "required block is missing");
    {
        const auto& j = root.at("model");
        expect_object(j, "model");
        reject_unknown(j, "model", {"epsilon", "gamma", "beta", "rho", "delta_witness"});
        cfg.model.epsilon = require_num(j, "model", "epsilon");
        cfg.model.gamma = require_num(j, "model", "gamma");
        cfg.model.beta = require_num(j, "model", "beta");
        cfg.model.rho = get_num(j, "model", "rho", 0.0);
        if (!(cfg.model.epsilon > 0)) fail("model.epsilon", "must be positive");
        if (!(cfg.model.gamma > 0)) fail("model.gamma", "must be positive");
        if (!(cfg.model.beta > 0)) fail("model.beta", "must be positive");
        if (cfg.model.rho < 0) fail("model.rho", "must be nonnegative");
        if (j.contains("delta_witness")) {
            const double d = require_num(j, "model", "delta_witness");
            if (!(d > 0) || !(d < 0.25)) fail("model.delta_witness", "must lie in (0, 1/4)");
            if (!(model::admissible_discriminant(cfg.model.beta, cfg.model.gamma) > 0) ||
                !(model::admissible_delta_condition(cfg.model.beta, cfg.model.gamma, d) > 0))
                fail("model.delta_witness", "does not witness admissibility for (beta, gamma)");
            cfg.model.delta_witness = d;
        }
    }

    if (!root.contains("source")) fail("source", "required block is missing");
    {
        const auto& j = root.at("source");
        expect_object(j, "source");
        reject_unknown(j, "source", {"a", "b", "d1", "d2", "x0", "omega1", "eta"});
        cfg.source.a = get_num(j, "source", "a", 0.0);
        cfg.source.b = get_num(j, "source", "b", 0.0);
        cfg.source.d1 = get_num(j, "source", "d1", 1.0);
        cfg.source.d2 = get_num(j, "source", "d2", 1.0);
        cfg.source.x0 = get_num(j, "source", "x0", 0.0);
        cfg.source.omega1 = get_num(j, "source", "omega1", 1.0);
        cfg.source.eta = get_num(j, "source", "eta", 1.0);
        if (!(cfg.source.d1 > 0)) fail("source.d1", "must be positive");
        if (!(cfg.source.d2 > 0)) fail("source.d2", "must be positive");
        if (!(cfg.source.omega1 > 0)) fail("source.omega1", "must be positive");
        if (!(cfg.source.eta > 0)) fail("source.eta", "must be positive");
    }

    if (root.contains("grid")) {
        const auto& j = root.at("grid");
        expect_object(j, "grid");
        reject_unknown(j, "grid", {"half_extent", "n_points"});
        cfg.grid.half_extent = get_num(j, "grid", "half_extent", -1.0);
        cfg.grid.n_points = get_int(j, "grid", "n_points", 4001);
        if (j.contains("half_extent") && !(cfg.grid.half_extent > 0))
            fail("grid.half_extent", "must be positive");
        if (cfg.grid.n_points < 3) fail("grid.n_points", "must be at least 3");
    }

    if (root.contains("time")) {
        const auto& j = root.at("time");
        expect_object(j, "time");
        reject_unknown(j, "time", {"T", "dt_policy", "sample_every"});
        cfg.time.T = get_num(j, "time", "T", 20.0);
        if (!(cfg.time.T > 0)) fail("time.T", "must be positive");
        cfg.time.sample_every = get_int(j, "time", "sample_every", 0);
        if (cfg.time.sample_every < 0) fail("time.sample_every", "must be nonnegative");
        if (j.contains("dt_policy")) {
            const auto& p = j.at("dt_policy");
            expect_object(p, "time.dt_policy");
            reject_unknown(p, "time.dt_policy",
                           {"fast_steps_per_period", "slow_steps_per_period"});
            cfg.time.dt_policy.fast_steps_per_period =
                int(get_int(p, "time.dt_policy", "fast_steps_per_period", 40));
            cfg.time.dt_policy.slow_steps_per_period =
                int(get_int(p, "time.dt_policy", "slow_steps_per_period", 200));
            if (cfg.time.dt_policy.fast_steps_per_period < 1)
                fail("time.dt_policy.fast_steps_per_period", "must be at least 1");
            if (cfg.time.dt_policy.slow_steps_per_period < 1)
                fail("time.dt_policy.slow_steps_per_period", "must be at least 1");
        }
    }

    if (root.contains("study")) {
        const auto& j = root.at("study");
        expect_object(j, "study");
        reject_unknown(j, "study",
                       {"kind",          "Delta",        "bound",        "x_samples",
                        "t_samples",     "invariance_T", "initial_gauge", "system",
                        "initial",       "bump_amp1",    "bump_amp2",    "bump_width",
                        "source_dump_time", "V_values",  "x_values",     "t_values",
                        "W",             "omega_list",   "sample_interval", "monitor_bound",
                        "d",             "profile",      "x",            "t"});
        auto& s = cfg.study;
        s.kind = get_str(j, "study", "kind", "");
        s.Delta = get_num(j, "study", "Delta", -1.0);
        s.bound = get_num(j, "study", "bound", 0.5);
        s.x_samples = get_int(j, "study", "x_samples", 2001);
        s.t_samples = get_int(j, "study", "t_samples", 200);
        s.invariance_T = get_num(j, "study", "invariance_T", -1.0);
        s.initial_gauge = get_num(j, "study", "initial_gauge", 0.5);
        s.system = get_str(j, "study", "system", "full");
        s.initial = get_str(j, "study", "initial", "zero");
        s.bump_amp1 = get_num(j, "study", "bump_amp1", 0.1);
        s.bump_amp2 = get_num(j, "study", "bump_amp2", 0.0);
        s.bump_width = get_num(j, "study", "bump_width", 2.0);
        s.source_dump_time = get_num(j, "study", "source_dump_time", 0.0);
        s.V_values = get_num_list(j, "study", "V_values", s.V_values);
        s.x_values = get_num_list(j, "study", "x_values", s.x_values);
        s.t_values = get_num_list(j, "study", "t_values", s.t_values);
        s.W = get_num(j, "study", "W", 0.05);
        s.omega_list = get_num_list(j, "study", "omega_list", {});
        s.sample_interval = get_num(j, "study", "sample_interval", -1.0);
        s.monitor_bound = get_num(j, "study", "monitor_bound", 0.0);
        s.d = get_num(j, "study", "d", 1.0);
        s.profile = get_str(j, "study", "profile", "both");
        s.x = get_num(j, "study", "x", 0.0);
        s.t = get_num(j, "study", "t", 2.0);
    }

    if (root.contains("output")) {
        const auto& j = root.at("output");
        expect_object(j, "output");
        reject_unknown(j, "output", {"directory", "formats"});
        cfg.output.directory = get_str(j, "output", "directory", "out");
        if (cfg.output.directory.empty()) fail("output.directory", "must be nonempty");
        if (j.contains("formats")) {
            if (!j.at("formats").is_array()) fail("output.formats", "must be an array");
            cfg.output.formats.clear();
            for (const auto& f : j.at("formats")) {
                if (!f.is_string() ||
                    (f.get<std::string>() != "csv" && f.get<std::string>() != "json"))
                    fail("output.formats", "entries must be \"csv\" or \"json\"");
                cfg.output.formats.push_back(f.get<std::string>());
            }
        }
    }

    if (root.contains("threads")) {
        if (!root.at("threads").is_number_integer()) fail("threads", "must be an integer");
        cfg.threads = root.at("threads").get<int>();
        if (cfg.threads < 1) fail("threads", "must be at least 1");
    }
    if (root.contains("seed")) {
        if (!root.at("seed").is_number_unsigned() && !root.at("seed").is_number_integer())
            fail("seed", "must be a nonnegative integer");
        const long long s = root.at("seed").get<long long>();
        if (s < 0) fail("seed", "must be a nonnegative integer");
        cfg.seed = unsigned(s);
    }

    validate_study(cfg);
    return cfg;
}

namespace {

void validate_study(const RunConfig& cfg) {
    const auto& s = cfg.study;
    if (s.kind.empty()) return;  // kind may be supplied later by the subcommand
    if (!kStudyKinds.count(s.kind))
        fail("study.kind", "must be one of equilibrium, admissible, rectangle, simulate, "
                           "average-check, oscillatory, sweep");
    if (s.kind == "sweep") {
        if (s.omega_list.empty()) fail("study.omega_list", "required for sweep studies");
        for (double w : s.omega_list)
            if (!(w > 0)) fail("study.omega_list", "entries must be positive");
    }
    if (s.kind == "rectangle") {
        if (!(s.bound > 0)) fail("study.bound", "must be positive");
        if (s.x_samples < 2 || s.t_samples < 2)
            fail("study.x_samples", "need at least 2 samples per axis (also study.t_samples)");
        if (!(s.initial_gauge > 0) || s.initial_gauge > 1)
            fail("study.initial_gauge", "must lie in (0, 1]");
    }
    if (s.kind == "simulate" && !kSystems.count(s.system))
        fail("study.system", "must be one of full, centered, pas, linear_error, "
                             "nonlinear_error, remainder");
    if (s.kind == "simulate" && s.initial != "zero" && s.initial != "bump")
        fail("study.initial", "must be \"zero\" or \"bump\"");
    if (s.kind == "average-check") {
        if (s.V_values.empty() || s.x_values.empty())
            fail("study.V_values", "must be nonempty (also study.x_values)");
        for (double w : s.omega_list)
            if (!(w > 0)) fail("study.omega_list", "entries must be positive");
    }
    if (s.kind == "oscillatory") {
        if (!(s.d > 0)) fail("study.d", "must be positive");
        if (!(s.t > 0)) fail("study.t", "must be positive");
        if (s.profile != "constant" && s.profile != "gaussian_cos" && s.profile != "both")
            fail("study.profile", "must be constant, gaussian_cos, or both");
        for (double w : s.omega_list)
            if (!(w > 0)) fail("study.omega_list", "entries must be positive");
    }
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open file: " + path);
    nlohmann::ordered_json root;
    try {
        root = nlohmann::ordered_json::parse(in);  // exceptions carry line/column
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return parse_config(root);
}

nlohmann::ordered_json echo_config(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["model"] = {{"epsilon", cfg.model.epsilon},
                  {"gamma", cfg.model.gamma},
                  {"beta", cfg.model.beta},
                  {"rho", cfg.model.rho}};
    if (cfg.model.delta_witness) j["model"]["delta_witness"] = *cfg.model.delta_witness;
    j["source"] = {{"a", cfg.source.a},   {"b", cfg.source.b},   {"d1", cfg.source.d1},
                   {"d2", cfg.source.d2}, {"x0", cfg.source.x0}, {"omega1", cfg.source.omega1},
                   {"eta", cfg.source.eta}};
    const auto grid = effective_grid(cfg);
    j["grid"] = {{"half_extent", grid.half_extent}, {"n_points", grid.n_points}};
    j["time"] = {{"T", cfg.time.T},
                 {"dt_policy",
                  {{"fast_steps_per_period", cfg.time.dt_policy.fast_steps_per_period},
                   {"slow_steps_per_period", cfg.time.dt_policy.slow_steps_per_period}}},
                 {"sample_every", cfg.time.sample_every}};
    nlohmann::ordered_json js;
    const auto& s = cfg.study;
    js["kind"] = s.kind;
    if (s.kind == "rectangle") {
        js["Delta"] = s.Delta;
        js["bound"] = s.bound;
        js["x_samples"] = s.x_samples;
        js["t_samples"] = s.t_samples;
        js["invariance_T"] = s.invariance_T;
        js["initial_gauge"] = s.initial_gauge;
    } else if (s.kind == "simulate") {
        js["system"] = s.system;
        js["initial"] = s.initial;
        js["bump_amp1"] = s.bump_amp1;
        js["bump_amp2"] = s.bump_amp2;
        js["bump_width"] = s.bump_width;
        js["source_dump_time"] = s.source_dump_time;
    } else if (s.kind == "average-check") {
        js["V_values"] = s.V_values;
        js["x_values"] = s.x_values;
        js["t_values"] = s.t_values;
        js["W"] = s.W;
        js["omega_list"] = s.omega_list;
    } else if (s.kind == "sweep") {
        js["omega_list"] = s.omega_list;
        js["sample_interval"] = s.sample_interval;
        js["monitor_bound"] = s.monitor_bound;
        js["initial"] = s.initial;
    } else if (s.kind == "oscillatory") {
        js["d"] = s.d;
        js["omega_list"] = s.omega_list;
        js["profile"] = s.profile;
        js["x"] = s.x;
        js["t"] = s.t;
    }
    j["study"] = js;
    j["output"] = {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}};
    j["threads"] = cfg.threads;
    j["seed"] = cfg.seed;
    return j;
}

solver::Grid<double> effective_grid(const RunConfig& cfg) {
    solver::Grid<double> g;
    g.half_extent = cfg.grid.half_extent > 0 ? cfg.grid.half_extent
                                             : solver::default_half_extent(cfg.source);
    g.n_points = cfg.grid.n_points;
    return g;
}

}  // namespace ifcable::cli
