#include "svq/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <regex>
#include <sstream>

#include "svq/codec.hpp"
#include "svq/config.hpp"
#include "svq/errors.hpp"
#include "svq/gradients.hpp"
#include "svq/model_io.hpp"
#include "svq/pgm.hpp"
#include "svq/scene.hpp"
#include "svq/trainer.hpp"

namespace fs = std::filesystem;

namespace svq::cli {

namespace {

std::ofstream open_for_write(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void finish_write(std::ofstream& f, const fs::path& path) {
  if (!f.flush()) throw IoError("write failed: " + path.string());
}

const char* family_name(ParamFamily f) {
  switch (f) {
    case ParamFamily::weight: return "weights";
    case ParamFamily::bias: return "biases";
    case ParamFamily::recon: return "recons";
  }
  return "?";
}

std::string describe(const ParamAddress& a) {
  std::ostringstream s;
  s << "stage " << a.stage + 1 << " " << family_name(a.family) << "[" << a.row + 1;
  if (a.family != ParamFamily::bias) s << "," << a.col + 1;
  s << "]";
  return s.str();
}

}  // namespace

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(opts.config);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out) cfg.output_dir = *opts.out;
    cfg.validate();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }

  try {
    const fs::path dir = cfg.output_dir;
    const fs::path snaps = dir / "snapshots";
    std::error_code ec;
    fs::create_directories(snaps, ec);
    if (ec || !fs::is_directory(snaps)) throw IoError("cannot create output directory " + snaps.string());

    {
      auto f = open_for_write(dir / "manifest.ini");
      f << format_manifest(cfg);
      finish_write(f, dir / "manifest.ini");
    }

    const auto data = enumerate_distribution(cfg.scene);
    const auto spec = cfg.chain_spec();
    TrainState state{initialize(spec, data, cfg.seed), 0, Rng(Rng::derive(cfg.seed, 0)), {}};
    const UpdateOptions update{cfg.bias_normalizer};

    auto sink = [&](const Snapshot& snap) {
      for (std::size_t l = 0; l < snap.chain.size(); ++l) {
        const fs::path p = snaps / ("step_" + std::to_string(snap.step) + "_stage_" +
                                    std::to_string(l + 1) + ".csv");
        auto f = open_for_write(p);
        write_recons_csv(f, snap.chain.stages[l].recons);
        finish_write(f, p);
      }
    };
    run_schedule(state, data, cfg.schedule, cfg.snapshot_every, sink, update);

    {
      const fs::path p = dir / "history.csv";
      auto f = open_for_write(p);
      f << std::setprecision(17) << "step,stage,D1,D2,weighted_total\n";
      for (const auto& h : state.history)
        for (std::size_t l = 0; l < h.per_stage.size(); ++l)
          f << h.step << "," << l + 1 << "," << h.per_stage[l].d1 << "," << h.per_stage[l].d2 << ","
            << h.total << "\n";
      finish_write(f, p);
    }
    save_model(dir / "model.txt", Model{state.chain, cfg.scene});

    const auto final_obj = chain_objective(state.chain, data);
    out << "trained " << cfg.stages.size() << "-stage chain for " << state.step_counter
        << " steps; initial total " << state.history.front().total << ", final total "
        << final_obj.total << "\n"
        << "wrote " << dir.string() << "\n";
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

GradcheckReport run_gradcheck(const GradcheckOptions& opts) {
  if (opts.dims.size() < 2) throw ArgumentError("gradcheck: dims needs an input size and at least one M");
  if (opts.n.size() != opts.dims.size() - 1) throw ArgumentError("gradcheck: one n per stage required");
  if (opts.items == 0) throw ArgumentError("gradcheck: items must be positive");

  Rng rng(opts.seed);
  ChainParams chain;
  for (std::size_t l = 0; l + 1 < opts.dims.size(); ++l) {
    auto s = StageParams::zeros(opts.dims[l + 1], opts.n[l], opts.dims[l]);
    for (double& v : s.weights.flat()) v = rng.uniform(-1.0, 1.0);
    for (double& v : s.biases) v = rng.uniform(-1.0, 1.0);
    for (double& v : s.recons.flat()) v = rng.uniform(0.0, 1.0);
    chain.stages.push_back(std::move(s));
    chain.stage_weights.push_back(rng.uniform(0.5, 2.0));
  }
  Matrix vectors(opts.items, opts.dims.front());
  for (double& v : vectors.flat()) v = rng.uniform(0.0, 2.0);
  std::vector<double> probs(opts.items);
  double total = 0.0;
  for (double& p : probs) total += (p = rng.uniform(0.1, 1.0));
  for (double& p : probs) p /= total;
  WeightedDataset data{std::move(vectors), std::move(probs)};

  const auto grads = chain_gradients(chain, data).grads;

  // A random subset, topped up so every (stage, family) appears.
  auto addrs = all_addresses(chain);
  for (std::size_t i = addrs.size(); i > 1; --i)
    std::swap(addrs[i - 1], addrs[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
  std::vector<ParamAddress> chosen(addrs.begin(), addrs.begin() + std::min(opts.coords, addrs.size()));
  for (const auto& a : addrs) {
    const bool covered = std::any_of(chosen.begin(), chosen.end(), [&](const ParamAddress& c) {
      return c.stage == a.stage && c.family == a.family;
    });
    if (!covered) chosen.push_back(a);
  }

  GradcheckReport rep;
  for (const auto& a : chosen) {
    const double analytic = gradient_at(grads, a);
    const double fd = finite_difference_gradient(chain, data, a, opts.h);
    const double rel = std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
    if (rel >= rep.worst) {
      rep.worst = rel;
      rep.worst_coordinate = describe(a);
    }
    ++rep.checked;
  }
  return rep;
}

int cmd_gradcheck(const GradcheckOptions& opts, std::ostream& out, std::ostream& err) {
  GradcheckReport rep;
  try {
    rep = run_gradcheck(opts);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  out << std::setprecision(6) << "checked " << rep.checked << " coordinates; worst relative error "
      << rep.worst << " at " << rep.worst_coordinate << "\n";
  if (rep.worst > opts.tolerance) {
    out << "FAIL: exceeds tolerance " << opts.tolerance << " at " << rep.worst_coordinate << "\n";
    return kExitCheckFailed;
  }
  out << "PASS (tolerance " << opts.tolerance << ")\n";
  return kExitOk;
}

int cmd_gen_data(const GenDataOptions& opts, std::ostream& out, std::ostream& err) {
  SceneConfig cfg;
  try {
    cfg.mode = parse_scene_mode(opts.mode);
    cfg.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  if (!opts.enumerate && opts.count == 0) {
    err << "error: give --enumerate or a positive --count\n";
    return kExitBadInput;
  }

  WeightedDataset data;
  if (opts.enumerate) {
    data = enumerate_distribution(cfg);
  } else {
    Rng rng(opts.seed);
    Matrix rows(opts.count, cfg.dim);
    for (std::size_t i = 0; i < opts.count; ++i) {
      const auto [p1, p2] = sample_positions(cfg, rng);
      const auto v = scene_vector(cfg, p1, p2);
      std::copy(v.begin(), v.end(), rows.row(i).begin());
    }
    data = WeightedDataset::uniform(std::move(rows));
  }

  try {
    if (opts.out.empty()) {
      write_dataset_csv(out, data, opts.enumerate);
    } else {
      auto f = open_for_write(opts.out);
      write_dataset_csv(f, data, opts.enumerate);
      finish_write(f, opts.out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

int cmd_render(const RenderOptions& opts, std::ostream& out, std::ostream& err) {
  std::map<std::size_t, fs::path> by_step;
  std::error_code ec;
  if (fs::is_directory(opts.snapshot_dir, ec)) {
    const std::regex name("step_([0-9]+)_stage_([0-9]+)\\.csv");
    for (const auto& entry : fs::directory_iterator(opts.snapshot_dir, ec)) {
      std::smatch m;
      const std::string fname = entry.path().filename().string();
      if (std::regex_match(fname, m, name) && std::stoul(m[2].str()) == opts.stage)
        by_step[std::stoul(m[1].str())] = entry.path();
    }
  }
  if (by_step.empty()) {
    err << "error: no stage " << opts.stage << " snapshots in " << opts.snapshot_dir.string() << "\n";
    return kExitBadInput;
  }

  std::vector<Matrix> frames;
  try {
    for (const auto& [step, path] : by_step) {
      std::ifstream f(path);
      if (!f) throw IoError("cannot read " + path.string());
      frames.push_back(read_recons_csv(f));
      if (frames.back().rows() == 0 ||
          (frames.size() > 1 && (frames.back().rows() != frames.front().rows() ||
                                 frames.back().cols() != frames.front().cols())))
        throw ConfigError("snapshot " + path.string() + " has an inconsistent shape");
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }

  const std::size_t M = frames.front().rows();
  const std::size_t dim = frames.front().cols();
  const std::size_t rows = frames.size();
  constexpr std::size_t kPad = 1;
  constexpr std::uint8_t kPadGray = 128;

  GrayImage combined(M * dim + (M - 1) * kPad, rows, kPadGray);
  try {
    const fs::path stem = opts.out.parent_path() / opts.out.stem();
    for (std::size_t y = 0; y < M; ++y) {
      GrayImage img(dim, rows);
      for (std::size_t t = 0; t < rows; ++t)
        for (std::size_t j = 0; j < dim; ++j) {
          const auto g = to_gray(frames[t](y, j));
          img.at(j, t) = g;
          combined.at(y * (dim + kPad) + j, t) = g;
        }
      save_pgm(fs::path(stem.string() + "_y" + std::to_string(y + 1) + ".pgm"), img);
    }
    save_pgm(opts.out, combined);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  out << "rendered " << rows << " snapshots of " << M << " code indices to " << opts.out.string() << "\n";
  return kExitOk;
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  Model model;
  try {
    model = load_model(opts.model);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  const auto& chain = model.chain;
  const auto data = enumerate_distribution(model.scene);
  const auto obj = chain_objective(chain, data);

  out << std::setprecision(10);
  for (std::size_t l = 0; l < chain.size(); ++l)
    out << "stage " << l + 1 << ": D1 = " << obj.per_stage[l].d1 << "  D2 = " << obj.per_stage[l].d2
        << "  s = " << chain.stage_weights[l] << "\n";
  out << "weighted total = " << obj.total << "\n";

  if (opts.mc > 0) {
    if (opts.mc < 2) {
      err << "error: --mc needs at least 2 draws\n";
      return kExitBadInput;
    }
    Rng rng(opts.seed);
    // Each stage is checked on the distribution of its own inputs.
    WeightedDataset stage_data = data;
    for (std::size_t l = 0; l < chain.size(); ++l) {
      const auto& stage = chain.stages[l];
      const auto est = estimate_constrained_distortion(stage, stage_data, opts.mc, rng);
      const double bound = obj.per_stage[l].sum();
      const double residual = est.estimate - bound;
      const bool pass = std::abs(residual) <= 3.0 * est.std_error;
      out << "stage " << l + 1 << " monte carlo (K=" << opts.mc << "): " << est.estimate << " +- "
          << est.std_error << "  D1+D2 = " << bound << "  residual = " << residual << "  "
          << (pass ? "PASS" : "FAIL") << "\n";
      if (l + 1 < chain.size()) {
        Matrix next(stage_data.size(), stage.M);
        for (std::size_t i = 0; i < stage_data.size(); ++i) {
          const auto p = posterior(stage, stage_data.item(i)).posterior;
          std::copy(p.begin(), p.end(), next.row(i).begin());
        }
        stage_data.vectors = std::move(next);
      }
    }
  }

  if (opts.diagnostics) {
    for (std::size_t l = 0; l < chain.size(); ++l) {
      const auto& s = chain.stages[l];
      std::map<std::size_t, std::size_t> hist;
      out << "stage " << l + 1 << " peaks:\n";
      for (std::size_t y = 0; y < s.M; ++y) {
        auto peaks = peak_profile(s.recons.row(y));
        ++hist[peaks.size()];
        std::sort(peaks.begin(), peaks.end());
        out << "  y=" << y + 1 << ": " << peaks.size() << " [";
        for (std::size_t k = 0; k < peaks.size(); ++k) out << (k ? " " : "") << peaks[k] + 1;
        out << "]\n";
      }
      out << "stage " << l + 1 << " peak-count histogram:";
      for (const auto& [count, rows] : hist) out << " " << count << ":" << rows;
      out << "\n";
    }
    if (model.scene.mode == SceneMode::correlated) {
      for (std::size_t l = 0; l < chain.size(); ++l) {
        const auto score = invariance_score(chain, model.scene, l);
        out << "invariance_score stage " << l + 1 << (l + 1 == chain.size() ? " (final)" : "") << " = ";
        if (score.degenerate) out << "inf (degenerate: posterior does not vary with centroid)\n";
        else out << score.value << "\n";
      }
    }
  }
  return kExitOk;
}

}  // namespace svq::cli
