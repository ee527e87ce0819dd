#include "svq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "svq/errors.hpp"

namespace svq {

std::size_t TrainingSchedule::total_steps() const {
  std::size_t total = 0;
  for (const auto& p : phases) total += p.steps;
  return total;
}

void TrainingSchedule::validate(std::size_t stage_count) const {
  if (phases.empty()) throw ConfigError("schedule has no phases");
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const auto& p = phases[k];
    const std::string where = "phase " + std::to_string(k + 1) + ": ";
    if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon))
      throw ConfigError(where + "epsilon must be positive");
    if (p.steps == 0) throw ConfigError(where + "steps must be positive");
    if (p.stage_weights.size() != stage_count)
      throw ConfigError(where + "needs " + std::to_string(stage_count) + " stage weights");
    for (double s : p.stage_weights)
      if (!(s >= 0.0) || !std::isfinite(s))
        throw ConfigError(where + "stage weights must be non-negative");
  }
}

ChainParams initialize(std::span<const StageSpec> chain_spec, const WeightedDataset& data,
                       std::uint64_t seed, double noise) {
  if (chain_spec.empty()) throw ConfigError("initialize: empty chain specification");
  data.validate();
  if (chain_spec.front().input_dim != data.dim())
    throw ConfigError("initialize: stage 1 input_dim does not match the data");
  for (std::size_t l = 1; l < chain_spec.size(); ++l)
    if (chain_spec[l].input_dim != chain_spec[l - 1].M)
      throw ConfigError("initialize: stage " + std::to_string(l + 1) +
                        " input_dim must equal the previous stage's M");

  Rng rng(seed);
  ChainParams chain;
  for (std::size_t l = 0; l < chain_spec.size(); ++l) {
    const auto& spec = chain_spec[l];
    auto stage = StageParams::zeros(spec.M, spec.n, spec.input_dim);
    const std::vector<double> centre =
        l == 0 ? data.mean()
               : std::vector<double>(spec.input_dim, 1.0 / static_cast<double>(spec.input_dim));
    for (double& w : stage.weights.flat()) w = rng.uniform(-noise, noise);
    for (std::size_t y = 0; y < spec.M; ++y) {
      auto r = stage.recons.row(y);
      for (std::size_t j = 0; j < spec.input_dim; ++j) r[j] = centre[j] + rng.uniform(-noise, noise);
    }
    stage.validate();
    chain.stages.push_back(std::move(stage));
  }
  chain.stage_weights.assign(chain.size(), 1.0);
  return chain;
}

namespace {

// Largest per-row RMS of a row-per-code gradient matrix.
double max_row_rms(const Matrix& g) {
  double best = 0.0;
  for (std::size_t y = 0; y < g.rows(); ++y) {
    const auto r = g.row(y);
    best = std::max(best, std::sqrt(dot(r, r) / static_cast<double>(g.cols())));
  }
  return best;
}

double max_abs(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

}  // namespace

StageParams apply_updates(StageParams stage, const StageGradients& grads, double epsilon,
                          const UpdateOptions& opts) {
  if (grads.g_w.rows() != stage.M || grads.g_w.cols() != stage.input_dim ||
      grads.g_x.rows() != stage.M || grads.g_x.cols() != stage.input_dim ||
      grads.g_b.size() != stage.M)
    throw ArgumentError("apply_updates: gradient shapes do not match the stage");

  const double gw0 = max_row_rms(grads.g_w);
  const double gx0 = max_row_rms(grads.g_x);
  const double gb0 = opts.bias_normalizer == BiasNormalizer::gradient ? max_abs(grads.g_b)
                                                                      : max_abs(stage.biases);
  if (gw0 >= opts.guard) {
    auto w = stage.weights.flat();
    const auto g = grads.g_w.flat();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= epsilon * g[i] / gw0;
  }
  if (gb0 >= opts.guard) {
    for (std::size_t y = 0; y < stage.M; ++y) stage.biases[y] -= epsilon * grads.g_b[y] / gb0;
  }
  if (gx0 >= opts.guard) {
    auto r = stage.recons.flat();
    const auto g = grads.g_x.flat();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= epsilon * g[i] / gx0;
  }
  return stage;
}

void train_step(TrainState& state, const WeightedDataset& data, double epsilon,
                std::span<const double> stage_weights, const UpdateOptions& opts) {
  auto& chain = state.chain;
  if (stage_weights.size() != chain.size())
    throw ConfigError("train_step: one stage weight per stage required");
  chain.stage_weights.assign(stage_weights.begin(), stage_weights.end());

  auto result = chain_gradients(chain, data);
  for (std::size_t l = 0; l < chain.size(); ++l)
    chain.stages[l] = apply_updates(std::move(chain.stages[l]), result.grads.per_stage[l], epsilon, opts);

  ++state.step_counter;
  state.history.push_back({state.step_counter, std::move(result.objective.per_stage),
                           result.objective.total});
}

void run_schedule(TrainState& state, const WeightedDataset& data,
                  const TrainingSchedule& schedule, std::size_t snapshot_every,
                  const SnapshotSink& sink, const UpdateOptions& opts) {
  schedule.validate(state.chain.size());
  if (snapshot_every == 0) throw ConfigError("snapshot_every must be positive");
  for (const auto& phase : schedule.phases) {
    for (std::size_t k = 0; k < phase.steps; ++k) {
      train_step(state, data, phase.epsilon, phase.stage_weights, opts);
      if (sink && state.step_counter % snapshot_every == 0)
        sink(Snapshot{state.step_counter, state.chain, state.history.back()});
    }
  }
}

std::vector<std::size_t> peak_profile(std::span<const double> recon, double threshold,
                                      int min_separation) {
  if (!(threshold > 0.0)) throw ArgumentError("peak_profile: threshold must be positive");
  const std::size_t dim = recon.size();
  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < dim; ++j) {
    const double v = recon[j];
    const double left = recon[(j + dim - 1) % dim];
    const double right = recon[(j + 1) % dim];
    if (v >= threshold && v >= left && v >= right) candidates.push_back(j);
  }
  // Strongest first; ties resolved by position for determinism.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return recon[a] > recon[b]; });
  std::vector<std::size_t> accepted;
  const int d = static_cast<int>(dim);
  for (std::size_t c : candidates) {
    const bool suppressed = std::any_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
      return circular_distance(static_cast<int>(a), static_cast<int>(c), d) <= min_separation;
    });
    if (!suppressed) accepted.push_back(c);
  }
  return accepted;
}

int pair_centroid(int p1, int separation, int dim) {
  // floor(u / 2) is u/2 rounded half-down for non-negative u
  return wrap_position(p1 + separation / 2, dim);
}

InvarianceScore invariance_score(const ChainParams& chain, const SceneConfig& cfg) {
  if (chain.stages.empty()) throw ArgumentError("invariance_score: empty chain");
  return invariance_score(chain, cfg, chain.size() - 1);
}

InvarianceScore invariance_score(const ChainParams& chain, const SceneConfig& cfg,
                                 std::size_t stage) {
  if (cfg.mode != SceneMode::correlated)
    throw ArgumentError("invariance_score requires a correlated scene");
  cfg.validate();
  chain.validate();
  if (chain.input_dim() != cfg.dim) throw ArgumentError("invariance_score: chain/scene dimension mismatch");

  const int dim = static_cast<int>(cfg.dim);
  if (stage >= chain.size()) throw ArgumentError("invariance_score: no such stage");

  // by_centroid[c][u] = posterior for centroid c, separation index u
  std::vector<std::vector<std::vector<double>>> by_centroid(cfg.dim);
  for (int p1 = 1; p1 <= dim; ++p1) {
    for (int u = cfg.sep_min; u <= cfg.sep_max; ++u) {
      const auto x = scene_vector(cfg, p1, wrap_position(p1 + u, dim));
      auto acts = chain_forward(chain, x);
      by_centroid[pair_centroid(p1, u, dim) - 1].push_back(std::move(acts[stage].posterior));
    }
  }

  return invariance_from_groups(by_centroid);
}

InvarianceScore invariance_from_groups(const std::vector<std::vector<std::vector<double>>>& groups) {
  if (groups.empty()) throw ArgumentError("invariance score: no groups");
  const std::size_t M = groups.front().at(0).size();
  const auto C = static_cast<double>(groups.size());
  std::vector<std::vector<double>> centroid_mean(groups.size(), std::vector<double>(M, 0.0));
  std::vector<double> grand(M, 0.0);
  double within = 0.0;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    const auto& group = groups[c];
    if (group.empty()) throw ArgumentError("invariance score: empty centroid group");
    const auto size = static_cast<double>(group.size());
    for (const auto& p : group)
      for (std::size_t y = 0; y < M; ++y) centroid_mean[c][y] += p[y] / size;
    for (const auto& p : group) within += squared_distance(p, centroid_mean[c]) / size;
    for (std::size_t y = 0; y < M; ++y) grand[y] += centroid_mean[c][y] / C;
  }
  within /= C;

  double between = 0.0;
  for (const auto& m : centroid_mean) between += squared_distance(m, grand);
  between /= C;

  if (between < 1e-12) return {std::numeric_limits<double>::infinity(), true};
  return {within / between, false};
}

}  // namespace svq
