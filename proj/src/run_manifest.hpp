#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "leadlag/pipeline.hpp"

namespace leadlag::detail {

using Clock = std::chrono::steady_clock;

struct StageTimer {
    Clock::time_point start = Clock::now();
    nlohmann::ordered_json timings = nlohmann::ordered_json::object();

    void mark(const std::string& stage) {
        auto now = Clock::now();
        timings[stage] = std::chrono::duration_cast<std::chrono::milliseconds>(now - start).count();
        start = now;
    }
};

inline nlohmann::ordered_json config_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["docs"] = c.docs_path;
    j["taxonomy"] = c.taxonomy_path;
    j["embeddings"] = c.embeddings_path;
    j["coords"] = c.coords_path;
    j["out"] = c.out_dir;
    j["years"] = {c.years.first, c.years.last};
    j["repr"] = c.repr;
    j["metric"] = c.metric;
    j["bins"] = c.bins;
    j["bandwidth"] = c.bandwidth;
    j["max_lag"] = c.max_lag;
    j["pareto_fraction"] = c.pareto_fraction;
    j["window_sweep"] = c.window_sweep;
    j["windows"] = c.windows;
    j["seed"] = c.seed;
    j["threads"] = c.resolved_threads();
    j["export_delta"] = c.export_delta;
    j["global_bounds"] = c.global_bounds;
    return j;
}

inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void write_manifest(const RunConfig& config, const std::string& command,
                           const nlohmann::ordered_json& counts, const nlohmann::ordered_json& timings,
                           const std::vector<std::string>& outputs) {
    nlohmann::ordered_json manifest;
    manifest["command"] = command;
    manifest["config"] = config_json(config);
    manifest["config_hash"] = fnv1a_hex(manifest["config"].dump());
    manifest["counts"] = counts;
    manifest["timings_ms"] = timings;
    manifest["outputs"] = outputs;

    std::filesystem::path path = std::filesystem::path(config.out_dir) / (command + "_manifest.json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    out << manifest.dump(2) << '\n';
}

} // namespace leadlag::detail
