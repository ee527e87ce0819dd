#include "svq/scene.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "svq/errors.hpp"

namespace svq {

std::string_view to_string(SceneMode mode) {
  return mode == SceneMode::independent ? "independent" : "correlated";
}

SceneMode parse_scene_mode(std::string_view text) {
  if (text == "independent") return SceneMode::independent;
  if (text == "correlated") return SceneMode::correlated;
  throw ArgumentError("unknown scene mode '" + std::string(text) +
                      "' (expected independent or correlated)");
}

void SceneConfig::validate() const {
  if (dim < 2) throw ConfigError("scene dim must be at least 2");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ConfigError("scene half_width must be positive");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw ConfigError("scene amplitude must be positive");
  if (mode == SceneMode::correlated) {
    if (sep_min > sep_max) throw ConfigError("scene separation range is empty");
    if (sep_min < 1 || sep_max > static_cast<int>(dim) - 1)
      throw ConfigError("scene separation range must lie within [1, dim-1]");
  }
}

int circular_distance(int a, int b, int dim) {
  const int d = std::abs(a - b) % dim;
  return std::min(d, dim - d);
}

int wrap_position(int p, int dim) { return ((p - 1) % dim + dim) % dim + 1; }

std::vector<double> scene_vector(const SceneConfig& cfg, int p1, int p2) {
  const int dim = static_cast<int>(cfg.dim);
  if (p1 < 1 || p1 > dim || p2 < 1 || p2 > dim)
    throw ArgumentError("scene_vector: object positions must lie in [1, " + std::to_string(dim) +
                        "]");
  const double inv_two_var = 1.0 / (2.0 * cfg.half_width * cfg.half_width);
  std::vector<double> v(cfg.dim);
  for (int j = 1; j <= dim; ++j) {
    const double d1 = circular_distance(j, p1, dim);
    const double d2 = circular_distance(j, p2, dim);
    v[j - 1] = cfg.amplitude * std::exp(-d1 * d1 * inv_two_var) +
               cfg.amplitude * std::exp(-d2 * d2 * inv_two_var);
  }
  return v;
}

std::pair<int, int> sample_positions(const SceneConfig& cfg, Rng& rng) {
  const int dim = static_cast<int>(cfg.dim);
  const int p1 = static_cast<int>(rng.uniform_int(1, dim));
  if (cfg.mode == SceneMode::independent) {
    return {p1, static_cast<int>(rng.uniform_int(1, dim))};
  }
  const int u = static_cast<int>(rng.uniform_int(cfg.sep_min, cfg.sep_max));
  return {p1, wrap_position(p1 + u, dim)};
}

WeightedDataset enumerate_distribution(const SceneConfig& cfg) {
  cfg.validate();
  const int dim = static_cast<int>(cfg.dim);
  std::vector<std::pair<int, int>> pairs;
  for (int p1 = 1; p1 <= dim; ++p1) {
    if (cfg.mode == SceneMode::independent) {
      for (int p2 = 1; p2 <= dim; ++p2) pairs.emplace_back(p1, p2);
    } else {
      for (int u = cfg.sep_min; u <= cfg.sep_max; ++u) pairs.emplace_back(p1, wrap_position(p1 + u, dim));
    }
  }
  Matrix vectors(pairs.size(), cfg.dim);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto v = scene_vector(cfg, pairs[i].first, pairs[i].second);
    std::copy(v.begin(), v.end(), vectors.row(i).begin());
  }
  return WeightedDataset::uniform(std::move(vectors));
}

}  // namespace svq
