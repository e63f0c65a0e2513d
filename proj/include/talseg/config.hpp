#pragma once

// Single configuration surface for the CLI. Precedence: command-line flags
// over config file over defaults. Unknown config keys are rejected. The
// effective configuration is echoed to a sidecar file next to the primary
// output for reproducibility.

#include <fstream>
#include <istream>
#include <string>

#include <json.hpp>

#include "talseg/errors.hpp"
#include "talseg/scorer.hpp"

namespace talseg {

struct PipelineConfig {
    double fps = 30.0;
    double conf_threshold = 0.5;
    double theta_head = 25.0;
    double theta_hand = 40.0;
    double gap_tolerance = 0.5;
    double min_duration = 1.0;
    MatchMode matching = MatchMode::kGreedy;
    int jobs = 1;
    std::string out;  // empty = stdout
};

inline void validate(const PipelineConfig& cfg) {
    if (!(cfg.fps > 0)) throw ConfigError("fps must be positive");
    if (!(cfg.conf_threshold >= 0 && cfg.conf_threshold <= 1))
        throw ConfigError("conf_threshold must be in [0,1]");
    if (!(cfg.theta_head > 0)) throw ConfigError("theta_head must be positive");
    if (!(cfg.gap_tolerance >= 0)) throw ConfigError("gap_tolerance must be non-negative");
    if (!(cfg.min_duration >= 0)) throw ConfigError("min_duration must be non-negative");
    if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");
}

inline void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        const nlohmann::json& v = item.value();
        try {
            if (key == "fps") cfg.fps = v.get<double>();
            else if (key == "conf_threshold") cfg.conf_threshold = v.get<double>();
            else if (key == "theta_head") cfg.theta_head = v.get<double>();
            else if (key == "theta_hand") cfg.theta_hand = v.get<double>();
            else if (key == "gap_tolerance") cfg.gap_tolerance = v.get<double>();
            else if (key == "min_duration") cfg.min_duration = v.get<double>();
            else if (key == "matching") cfg.matching = parse_match_mode(v.get<std::string>());
            else if (key == "jobs") cfg.jobs = v.get<int>();
            else if (key == "out") cfg.out = v.get<std::string>();
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

inline void load_config_file(PipelineConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    apply_config_json(cfg, j);
}

inline nlohmann::ordered_json config_json(const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["fps"] = cfg.fps;
    j["conf_threshold"] = cfg.conf_threshold;
    j["theta_head"] = cfg.theta_head;
    j["theta_hand"] = cfg.theta_hand;
    j["gap_tolerance"] = cfg.gap_tolerance;
    j["min_duration"] = cfg.min_duration;
    j["matching"] = match_mode_name(cfg.matching);
    j["jobs"] = cfg.jobs;
    j["out"] = cfg.out;
    return j;
}

inline void write_config_sidecar(const PipelineConfig& cfg, const std::string& sidecar_path) {
    std::ofstream out(sidecar_path);
    if (!out) throw Error("cannot write config sidecar '" + sidecar_path + "'");
    out << config_json(cfg).dump(2) << '\n';
}

}  // namespace talseg
