#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "qkp/matching.hpp"
#include "qkp/pipeline.hpp"
#include "qkp/solvers.hpp"

namespace qkp {

// Everything a run needs. A config file is a JSON object with optional
// sections; any key left out keeps its built-in default:
//
//   { "seed": 7, "threads": 0,
//     "solver":   { "preset": "digital", "shots": 10, ... },
//     "pipeline": { "width": 928, "height": 704, "grid": [32, 32],
//                   "location_weight": 0.25, "descriptor_window": 9,
//                   "levels": [ { "k": 10, "method": "kmedoids" },
//                               { "group": [4, 4], "k": 20 }, ... ] },
//     "matching": { "k_max": 1, "alpha": 0.2, "beta": 1, "gamma": 1 },
//     "kernel":   { "kind": "quantum", "scale": 0.5, "qubits": 5, "shots": 0,
//                   "gamma": 1.0 },
//     "experiment": { "angle": 20, "keypoints": 10, "alphas": [0.05, 0.2] } }
struct AppConfig {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  SolverConfig solver = SolverConfig::preset("digital");
  PipelineConfig pipeline;
  MatchingSpec matching;
  KernelSpec kernel;
  RotationExperimentConfig experiment;

  // Pushes the top-level seed into every solver and sampler configuration.
  void apply_seed();
};

// Throws ConfigError on malformed content and IoError when unreadable.
AppConfig load_config(const std::filesystem::path& path);
void merge_config(const nlohmann::json& j, AppConfig& config);

void merge_level(const nlohmann::json& j, LevelSpec& level);
void merge_kernel(const nlohmann::json& j, KernelSpec& kernel);

nlohmann::json to_json(const AppConfig& config);

}  // namespace qkp
