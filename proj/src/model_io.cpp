#include "svq/model_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "svq/errors.hpp"

namespace svq {

namespace {

constexpr int kModelVersion = 1;

void write_row(std::ostream& out, std::span<const double> row) {
  for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
  out << "\n";
}

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  void expect(const std::string& word) {
    std::string tok;
    if (!(in_ >> tok) || tok != word) throw ConfigError("model file: expected '" + word + "', got '" + tok + "'");
  }

  template <typename T>
  T read(const char* what) {
    T v{};
    if (!(in_ >> v)) throw ConfigError(std::string("model file: cannot read ") + what);
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_model(std::ostream& out, const Model& model) {
  const auto& chain = model.chain;
  const auto& sc = model.scene;
  out << std::setprecision(17);
  out << "svq-model " << kModelVersion << "\n";
  out << "scene " << to_string(sc.mode) << " " << sc.dim << " " << sc.half_width << " "
      << sc.amplitude << " " << sc.sep_min << " " << sc.sep_max << "\n";
  out << "stages " << chain.size() << "\n";
  out << "stage_weights ";
  write_row(out, chain.stage_weights);
  for (std::size_t l = 0; l < chain.size(); ++l) {
    const auto& s = chain.stages[l];
    out << "stage " << l + 1 << " " << s.M << " " << s.n << " " << s.input_dim << "\n";
    out << "weights\n";
    for (std::size_t y = 0; y < s.M; ++y) write_row(out, s.weights.row(y));
    out << "biases\n";
    write_row(out, s.biases);
    out << "recons\n";
    for (std::size_t y = 0; y < s.M; ++y) write_row(out, s.recons.row(y));
  }
  out << "end\n";
}

Model read_model(std::istream& in) {
  TokenReader r(in);
  r.expect("svq-model");
  const int version = r.read<int>("version");
  if (version != kModelVersion)
    throw ConfigError("model file: unsupported version " + std::to_string(version));

  Model m;
  r.expect("scene");
  try {
    m.scene.mode = parse_scene_mode(r.read<std::string>("scene mode"));
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("model file: ") + e.what());
  }
  m.scene.dim = r.read<std::size_t>("scene dim");
  m.scene.half_width = r.read<double>("half_width");
  m.scene.amplitude = r.read<double>("amplitude");
  m.scene.sep_min = r.read<int>("sep_min");
  m.scene.sep_max = r.read<int>("sep_max");

  r.expect("stages");
  const auto L = r.read<std::size_t>("stage count");
  if (L == 0 || L > 1000) throw ConfigError("model file: implausible stage count");
  r.expect("stage_weights");
  for (std::size_t l = 0; l < L; ++l) m.chain.stage_weights.push_back(r.read<double>("stage weight"));
  for (std::size_t l = 0; l < L; ++l) {
    r.expect("stage");
    if (r.read<std::size_t>("stage index") != l + 1) throw ConfigError("model file: stages out of order");
    const auto M = r.read<std::size_t>("M");
    const auto n = r.read<std::size_t>("n");
    const auto dim = r.read<std::size_t>("input_dim");
    if (M == 0 || n == 0 || dim == 0 || M > 100000 || dim > 100000)
      throw ConfigError("model file: implausible stage shape");
    auto s = StageParams::zeros(M, n, dim);
    r.expect("weights");
    for (double& v : s.weights.flat()) v = r.read<double>("weight");
    r.expect("biases");
    for (double& v : s.biases) v = r.read<double>("bias");
    r.expect("recons");
    for (double& v : s.recons.flat()) v = r.read<double>("recon");
    m.chain.stages.push_back(std::move(s));
  }
  r.expect("end");
  m.chain.validate();
  m.scene.validate();
  if (m.chain.input_dim() != m.scene.dim)
    throw ConfigError("model file: stage 1 input_dim does not match scene dim");
  return m;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_model(out, model);
  if (!out.flush()) throw IoError("write failed: " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model " + path.string());
  return read_model(in);
}

void write_dataset_csv(std::ostream& out, const WeightedDataset& data, bool with_prob) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    bool first = true;
    if (with_prob) {
      out << data.probs[i];
      first = false;
    }
    for (double v : data.item(i)) {
      out << (first ? "" : ",") << v;
      first = false;
    }
    out << "\n";
  }
}

void write_recons_csv(std::ostream& out, const Matrix& recons) {
  out << std::setprecision(17);
  for (std::size_t y = 0; y < recons.rows(); ++y) {
    out << y + 1;
    for (double v : recons.row(y)) out << "," << v;
    out << "\n";
  }
}

Matrix read_recons_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t expect_y = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::size_t y = 0;
    try {
      y = std::stoul(cell);
    } catch (const std::exception&) {
      throw ConfigError("snapshot csv: bad index '" + cell + "'");
    }
    if (y != expect_y++) throw ConfigError("snapshot csv: rows out of order");
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("snapshot csv: bad value '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ConfigError("snapshot csv: ragged rows");
    if (row.empty()) throw ConfigError("snapshot csv: row without values");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t y = 0; y < rows.size(); ++y) std::copy(rows[y].begin(), rows[y].end(), m.row(y).begin());
  return m;
}

}  // namespace svq
