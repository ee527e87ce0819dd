#pragma once

// Normalised gradient descent on the chain objective, multi-phase schedules
// and the diagnostics used to classify trained encoders.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "svq/gradients.hpp"
#include "svq/rng.hpp"
#include "svq/scene.hpp"

namespace svq {

struct Phase {
  double epsilon = 0.0;
  std::size_t steps = 0;
  std::vector<double> stage_weights;
  bool operator==(const Phase&) const = default;
};

struct TrainingSchedule {
  std::vector<Phase> phases;

  std::size_t total_steps() const;
  /// ConfigError unless there is at least one phase, every epsilon and step
  /// count is positive and every weighting has `stage_count` entries >= 0.
  void validate(std::size_t stage_count) const;

  bool operator==(const TrainingSchedule&) const = default;
};

/// How g_{b,0} is formed. `gradient` uses max_y |g_b(y)|, which makes the
/// largest bias step equal epsilon. `literal` uses max_y |b(y)|.
enum class BiasNormalizer { gradient, literal };

struct UpdateOptions {
  BiasNormalizer bias_normalizer = BiasNormalizer::gradient;
  double guard = 1e-12;  // a family whose normaliser is below this is not moved
};

struct HistoryEntry {
  std::size_t step = 0;
  std::vector<StageTerms> per_stage;
  double total = 0.0;
  bool operator==(const HistoryEntry&) const = default;
};

struct TrainState {
  ChainParams chain;
  std::size_t step_counter = 0;
  Rng rng;
  std::vector<HistoryEntry> history;
};

struct StageSpec {
  std::size_t M = 0;
  std::size_t n = 0;
  std::size_t input_dim = 0;
};

/// Weights uniform on [-noise, noise], zero biases, reconstruction rows at the
/// mean stage input plus uniform noise. Stage 1 uses the data mean; later
/// stages use the uniform vector 1/M of the previous stage. Stage weights are
/// set to 1.
ChainParams initialize(std::span<const StageSpec> chain_spec, const WeightedDataset& data,
                       std::uint64_t seed, double noise = 0.01);

/// One normalised step: each parameter family moves by epsilon times its
/// gradient divided by that family's largest per-row RMS (or |.|) gradient.
StageParams apply_updates(StageParams stage, const StageGradients& grads, double epsilon,
                          const UpdateOptions& opts = {});

/// Full-batch gradient evaluation followed by an update of every stage. The
/// history entry records the objective at the parameters before the update.
void train_step(TrainState& state, const WeightedDataset& data, double epsilon,
                std::span<const double> stage_weights, const UpdateOptions& opts = {});

struct Snapshot {
  std::size_t step;
  const ChainParams& chain;
  const HistoryEntry& entry;
};

using SnapshotSink = std::function<void(const Snapshot&)>;

/// Runs every phase in order, calling `sink` after each step whose index is a
/// multiple of `snapshot_every`. Exceptions from the sink stop training.
void run_schedule(TrainState& state, const WeightedDataset& data,
                  const TrainingSchedule& schedule, std::size_t snapshot_every,
                  const SnapshotSink& sink, const UpdateOptions& opts = {});

/// Circular local maxima >= threshold, strongest first, dropping any maximum
/// within `min_separation` of one already accepted. Returned as zero-based
/// component indices in acceptance order.
std::vector<std::size_t> peak_profile(std::span<const double> recon, double threshold = 0.5,
                                      int min_separation = 2);

struct InvarianceScore {
  double value = 0.0;
  bool degenerate = false;  // denominator below 1e-12; value is +inf
};

/// Within-centroid variance of the final-stage posterior over separations,
/// divided by its between-centroid variance. Correlated scenes only.
InvarianceScore invariance_score(const ChainParams& chain, const SceneConfig& cfg);

/// Same score computed on the posterior of stage `stage` (zero-based).
InvarianceScore invariance_score(const ChainParams& chain, const SceneConfig& cfg,
                                 std::size_t stage);

/// The ratio itself, from final posteriors grouped by centroid
/// (groups[c][k] is one posterior vector). Groups must be non-empty.
InvarianceScore invariance_from_groups(const std::vector<std::vector<std::vector<double>>>& groups);

/// Centroid position used by invariance_score: wrap(p1 + u/2), halves
/// rounded down.
int pair_centroid(int p1, int separation, int dim);

}  // namespace svq
