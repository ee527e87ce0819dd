#pragma once

// Experiment configuration: a small INI dialect.
//
//   [scene]    mode, dim, half_width, amplitude, sep_min, sep_max
//   [stage.K]  M, n                      (K = 1, 2, ... contiguous)
//   [phase.K]  epsilon, steps, stage_weights (comma separated, one per stage)
//   [run]      seed, snapshot_every, output_dir, bias_normalizer
//
// '#' and ';' start comments. Keys are case-sensitive.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "svq/scene.hpp"
#include "svq/trainer.hpp"

namespace svq {

struct StageShape {
  std::size_t M = 0;
  std::size_t n = 0;
  bool operator==(const StageShape&) const = default;
};

struct ExperimentConfig {
  SceneConfig scene;
  std::vector<StageShape> stages;
  TrainingSchedule schedule;
  std::uint64_t seed = 1;
  std::size_t snapshot_every = 25;
  std::filesystem::path output_dir = "run";
  BiasNormalizer bias_normalizer = BiasNormalizer::gradient;

  /// Stage shapes with input dimensions filled in by the linking rule.
  std::vector<StageSpec> chain_spec() const;
  void validate() const;  // ConfigError

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parse errors are ConfigError with a "<source>:<line>: " prefix.
ExperimentConfig parse_config(std::istream& in, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text; parse_config(format_config(c)) == c.
std::string format_config(const ExperimentConfig& cfg);

/// format_config plus a [manifest] section with code version and seed.
std::string format_manifest(const ExperimentConfig& cfg);

}  // namespace svq
