#include "svq/codec.hpp"

#include <cmath>
#include <string>

#include "svq/errors.hpp"

namespace svq {

CodeVector sample_code(const StageActivation& act, std::size_t n, Rng& rng) {
  if (n < 1) throw ArgumentError("sample_code: n must be at least 1");
  const auto& p = act.posterior;
  if (p.empty()) throw ArgumentError("sample_code: empty posterior");
  // Last index with positive mass absorbs rounding in the cumulative sum.
  std::size_t last = p.size() - 1;
  while (last > 0 && p[last] <= 0.0) --last;

  CodeVector code;
  code.indices.resize(n);
  for (auto& idx : code.indices) {
    const double u = rng.uniform();
    double cdf = 0.0;
    idx = last;
    for (std::size_t y = 0; y < last; ++y) {
      cdf += p[y];
      if (u < cdf) {
        idx = y;
        break;
      }
    }
  }
  return code;
}

std::vector<double> decode(const StageParams& stage, const CodeVector& code) {
  if (code.indices.empty()) throw ArgumentError("decode: empty code vector");
  std::vector<double> out(stage.input_dim, 0.0);
  for (std::size_t idx : code.indices) {
    if (idx >= stage.M)
      throw ArgumentError("decode: code index " + std::to_string(idx) + " outside codebook of size " +
                          std::to_string(stage.M));
    const auto r = stage.recons.row(idx);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += r[j];
  }
  const double inv = 1.0 / static_cast<double>(code.indices.size());
  for (double& v : out) v *= inv;
  return out;
}

DistortionEstimate estimate_constrained_distortion(const StageParams& stage,
                                                   const WeightedDataset& data, std::size_t K,
                                                   Rng& rng) {
  if (K < 2) throw ArgumentError("estimate_constrained_distortion: K must be at least 2");
  data.validate();
  if (data.dim() != stage.input_dim)
    throw ArgumentError("estimate_constrained_distortion: dataset dimension mismatch");

  const std::uint64_t master = rng.next_u64();
  const auto items = static_cast<std::ptrdiff_t>(data.size());
  std::vector<double> means(data.size());
  std::vector<double> variances(data.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < items; ++i) {
    Rng local(Rng::derive(master, static_cast<std::uint64_t>(i)));
    const auto x = data.item(static_cast<std::size_t>(i));
    const auto act = posterior(stage, x);
    // Welford running mean/variance of 2 |x - x'(y)|^2
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double d = 2.0 * squared_distance(x, decode(stage, sample_code(act, stage.n, local)));
      const double delta = d - mean;
      mean += delta / static_cast<double>(k + 1);
      m2 += delta * (d - mean);
    }
    means[i] = mean;
    variances[i] = m2 / static_cast<double>(K - 1);
  }

  DistortionEstimate est;
  double var = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    est.estimate += data.probs[i] * means[i];
    var += data.probs[i] * data.probs[i] * variances[i];
  }
  est.std_error = std::sqrt(var / static_cast<double>(K));
  return est;
}

}  // namespace svq
