#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "chaoslab/experiments.hpp"

namespace chaoslab {

/// Parsed experiment file. Suite-specific keys stay in `raw` and are read
/// by run_experiment; see README for the schema.
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    std::filesystem::path output_path;
    nlohmann::json raw;
};

/// Throws ConfigError on malformed input, an unknown experiment or a
/// missing seed.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

ModelFamily parse_model(const nlohmann::json& j, int d);
SimConfig parse_sim(const nlohmann::json& j, std::uint64_t seed);

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Name of the environment variable that overrides the output directory.
inline constexpr const char* kOutputDirEnv = "CHAOSLAB_OUTPUT_DIR";

/// Path of table `suffix`: output_path with the suffix inserted before the
/// extension, relocated into `dir_override` when it is non-empty.
std::filesystem::path table_path(const ExperimentConfig& cfg, const std::string& suffix,
                                 const std::string& dir_override);

}  // namespace chaoslab
