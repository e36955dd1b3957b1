#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewt/config.hpp"
#include "skewt/version.hpp"

namespace skewt {

/// FNV-1a 64-bit digest of the canonical (key-sorted) config dump; changes
/// iff the resolved config content changes.
inline std::string config_digest(const nlohmann::json& resolved) {
    const std::string dump = resolved.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Everything needed to reproduce a results file exactly.
struct RunManifest {
    ResolvedConfig resolved;
    struct Output {
        std::string experiment;
        std::string path;
        double wall_time_s = 0.0;
    };
    std::vector<Output> outputs;

    nlohmann::json to_json() const {
        const nlohmann::json cfg = resolved.to_json();
        nlohmann::json j;
        j["tool"] = "skewt_bench";
        j["version"] = kVersion;
        j["master_seed"] = resolved.config.seed;
        j["config_digest"] = config_digest(cfg);
        j["resolved_config"] = cfg;
        j["defaulted_keys"] = resolved.defaulted_keys;
        j["outputs"] = nlohmann::json::array();
        for (const auto& o : outputs)
            j["outputs"].push_back(
                {{"experiment", o.experiment}, {"path", o.path}, {"wall_time_s", o.wall_time_s}});
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ValidationError("manifest: cannot write " + path);
        out << to_json().dump(2) << "\n";
    }
};

}  // namespace skewt
