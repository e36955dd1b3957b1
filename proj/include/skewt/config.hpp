#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewt/experiments.hpp"

namespace skewt {

/// Fully resolved configuration: the config with all defaults filled in,
/// the list of keys that came from defaults (recorded in the run
/// manifest), and the canonical JSON form used for digesting.
struct ResolvedConfig {
    ExperimentConfig config;
    std::vector<std::string> defaulted_keys;

    nlohmann::json to_json() const {
        nlohmann::json j;
        switch (config.experiment) {
            case ExperimentKind::Simulate: j["experiment"] = "simulate"; break;
            case ExperimentKind::Positioning1d: j["experiment"] = "positioning-1d"; break;
            case ExperimentKind::Pseudorange: j["experiment"] = "pseudorange"; break;
            case ExperimentKind::Convergence: j["experiment"] = "convergence"; break;
            case ExperimentKind::EmpiricalNoise: j["experiment"] = "empirical-noise"; break;
        }
        j["seed"] = config.seed;
        j["n_mc"] = config.n_mc;
        j["horizon"] = config.horizon;
        j["q"] = config.q;
        j["delta"] = config.delta;
        j["nu"] = config.nu;
        j["algorithms"] = config.algorithms;
        j["reference"] = config.reference;
        nlohmann::json vb = nlohmann::json::object();
        for (const auto& name : config.algorithms) {
            if (name == "stvbf" || name == "tvbf" || name == "stvbs" || name == "tvbs") {
                const VbConfig v = vb_config_for(config, name);
                vb[name] = {{"max_iters", v.max_iters}, {"tol", v.tol}};
            }
        }
        j["vb"] = vb;
        j["particles"] = config.particles;
        j["iteration_grid"] = config.iteration_grid;
        j["particle_grid"] = config.particle_grid;
        j["delta_grid"] = config.delta_grid;
        j["convergence_n_mc"] = config.convergence_n_mc;
        j["histogram"] = config.histogram_path;
        j["initial_position_std"] = config.initial_position_std;
        j["threads"] = config.threads;
        j["format"] = config.format;
        return j;
    }
};

namespace detail {

inline ExperimentKind experiment_from_name(const std::string& name) {
    if (name == "simulate") return ExperimentKind::Simulate;
    if (name == "positioning-1d") return ExperimentKind::Positioning1d;
    if (name == "pseudorange") return ExperimentKind::Pseudorange;
    if (name == "convergence") return ExperimentKind::Convergence;
    if (name == "empirical-noise") return ExperimentKind::EmpiricalNoise;
    throw ValidationError(
        "config: unknown experiment '" + name +
        "'; valid: simulate, positioning-1d, pseudorange, convergence, empirical-noise");
}

template <typename T>
T require_type(const nlohmann::json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("config: key '" + key + "' has the wrong type");
    }
}

}  // namespace detail

/// Parse and validate a config JSON document. Unknown keys are errors
/// (fail-closed); every key not present is filled from the defaults and
/// reported in defaulted_keys.
inline ResolvedConfig parse_config_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("config: document must be a JSON object");
    static const std::set<std::string> allowed = {
        "experiment",    "seed",          "n_mc",           "horizon",
        "q",             "delta",         "nu",             "algorithms",
        "reference",     "vb",            "particles",      "iteration_grid",
        "particle_grid", "delta_grid",    "convergence_n_mc", "histogram",
        "initial_position_std", "threads", "out",           "format"};
    for (const auto& [key, value] : doc.items())
        if (!allowed.count(key)) throw ValidationError("config: unknown key '" + key + "'");

    ResolvedConfig resolved;
    ExperimentConfig& cfg = resolved.config;

    if (doc.contains("experiment"))
        cfg.experiment = detail::experiment_from_name(
            detail::require_type<std::string>(doc["experiment"], "experiment"));
    else
        resolved.defaulted_keys.push_back("experiment");

    auto load = [&](const char* key, auto& field) {
        using T = std::decay_t<decltype(field)>;
        if (doc.contains(key))
            field = detail::require_type<T>(doc[key], key);
        else
            resolved.defaulted_keys.push_back(key);
    };
    load("seed", cfg.seed);
    load("n_mc", cfg.n_mc);
    load("horizon", cfg.horizon);
    load("q", cfg.q);
    load("delta", cfg.delta);
    load("nu", cfg.nu);
    load("reference", cfg.reference);
    load("particles", cfg.particles);
    load("iteration_grid", cfg.iteration_grid);
    load("particle_grid", cfg.particle_grid);
    load("delta_grid", cfg.delta_grid);
    load("convergence_n_mc", cfg.convergence_n_mc);
    load("initial_position_std", cfg.initial_position_std);
    load("threads", cfg.threads);
    load("out", cfg.out);
    load("format", cfg.format);
    if (doc.contains("histogram"))
        cfg.histogram_path = detail::require_type<std::string>(doc["histogram"], "histogram");
    else
        resolved.defaulted_keys.push_back("histogram");

    if (doc.contains("algorithms")) {
        cfg.algorithms = detail::require_type<std::vector<std::string>>(doc["algorithms"],
                                                                        "algorithms");
    } else {
        resolved.defaulted_keys.push_back("algorithms");
        if (cfg.experiment == ExperimentKind::Pseudorange && cfg.reference == "stvbs")
            cfg.algorithms = {"stvbs", "tvbs", "rtss-g", "rtss"};
    }

    if (doc.contains("vb")) {
        if (!doc["vb"].is_object())
            throw ValidationError("config: key 'vb' must map algorithm names to settings");
        for (const auto& [name, spec] : doc["vb"].items()) {
            VbConfig v = vb_config_for(cfg, name);
            if (!spec.is_object()) throw ValidationError("config: vb entry '" + name +
                                                         "' must be an object");
            for (const auto& [k, val] : spec.items()) {
                if (k == "max_iters")
                    v.max_iters = detail::require_type<int>(val, "vb.max_iters");
                else if (k == "tol")
                    v.tol = detail::require_type<double>(val, "vb.tol");
                else
                    throw ValidationError("config: unknown key 'vb." + name + "." + k + "'");
            }
            v.validate();
            cfg.vb[name] = v;
        }
    } else {
        resolved.defaulted_keys.push_back("vb");
    }

    if (!(cfg.q >= 0.0)) throw ValidationError("config: key 'q' must be >= 0");
    cfg.validate();
    return resolved;
}

inline ResolvedConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& err) {
        throw ValidationError("config: " + path + " is not valid JSON: " + err.what());
    }
    return parse_config_json(doc);
}

}  // namespace skewt
