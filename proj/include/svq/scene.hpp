#pragma once

// Synthetic scenes: two Gaussian humps on a circular 1-D retina.

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "svq/core.hpp"
#include "svq/rng.hpp"

namespace svq {

enum class SceneMode { independent, correlated };

std::string_view to_string(SceneMode mode);
SceneMode parse_scene_mode(std::string_view text);  // ArgumentError on unknown

struct SceneConfig {
  std::size_t dim = 24;
  double half_width = 1.5;  // sigma of exp(-d^2 / (2 sigma^2))
  double amplitude = 1.0;
  SceneMode mode = SceneMode::independent;
  int sep_min = 4;  // correlated mode only
  int sep_max = 8;

  std::size_t separation_count() const { return static_cast<std::size_t>(sep_max - sep_min + 1); }
  void validate() const;  // ConfigError

  bool operator==(const SceneConfig&) const = default;
};

/// Positions are 1-based, in [1, dim].
int circular_distance(int a, int b, int dim);
int wrap_position(int p, int dim);

std::vector<double> scene_vector(const SceneConfig& cfg, int p1, int p2);
std::pair<int, int> sample_positions(const SceneConfig& cfg, Rng& rng);

/// Full support of the generator: dim^2 ordered pairs (independent) or
/// dim * |sep range| pairs (correlated), each equally likely. Ordered with
/// p1 outermost.
WeightedDataset enumerate_distribution(const SceneConfig& cfg);

}  // namespace svq
