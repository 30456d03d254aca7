#pragma once

#include "phenoclust/pipeline.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace phenoclust {

/// Everything a run depends on. Config files are JSON objects using the key
/// names of `to_json`; absent keys keep the defaults below and unknown keys
/// are rejected.
struct RunConfig {
    std::string input;
    std::string schema;
    std::string output;
    int folds = 5;            // "K"
    double gamma0 = 0.0;
    double gamma_step = 0.0;  // 0 = automatic
    int n_min = 2;
    int n_max = 8;
    int rank = 2;             // "k"
    int restarts = 8;
    int repeats = 500;
    double necessity_threshold = 0.9;
    double alpha = 0.05;
    std::optional<std::uint64_t> seed;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Resolved configuration without the output directory.
nlohmann::json to_json(const RunConfig& config);

/// Range checks shared by every command. Throws ConfigError("parameter").
void validate(const RunConfig& config);

/// Throws ConfigError("config") when no seed was given.
std::uint64_t require_seed(const RunConfig& config);

pipeline::PipelineConfig to_pipeline_config(const RunConfig& config, std::size_t threads = 0);

} // namespace phenoclust
