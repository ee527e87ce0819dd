#pragma once

// Plain-text model files:
//
//   svq-model 1
//   scene <mode> <dim> <half_width> <amplitude> <sep_min> <sep_max>
//   stages <L>
//   stage_weights <s_1> ... <s_L>
//   stage <l> <M> <n> <input_dim>
//   weights      (M lines of input_dim values)
//   biases       (one line of M values)
//   recons       (M lines of input_dim values)
//   ... repeated per stage ...
//   end
//
// Values are written with 17 significant digits and read back exactly.

#include <filesystem>
#include <iosfwd>

#include "svq/core.hpp"
#include "svq/scene.hpp"

namespace svq {

struct Model {
  ChainParams chain;
  SceneConfig scene;
};

void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);  // ConfigError on malformed input

void save_model(const std::filesystem::path& path, const Model& model);  // IoError
Model load_model(const std::filesystem::path& path);  // IoError / ConfigError

/// Writes `data` as CSV rows: prob (if `with_prob`) then components.
void write_dataset_csv(std::ostream& out, const WeightedDataset& data, bool with_prob);

/// Rows "y,c_1,...,c_dim" with y one-based.
void write_recons_csv(std::ostream& out, const Matrix& recons);
Matrix read_recons_csv(std::istream& in);  // ConfigError on ragged/malformed rows

}  // namespace svq
