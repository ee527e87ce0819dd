#pragma once

// Subcommands of the `svq` tool. Each returns the process exit status and
// writes human-readable output to `out` and diagnostics to `err`.
//
// Exit codes: 0 success, 1 check failed, 2 bad input (schema, arguments,
// unreadable model, empty snapshot directory), 3 I/O failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace svq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitIo = 3;

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;           // overrides [run] seed
  std::optional<std::filesystem::path> out;    // overrides [run] output_dir
};

/// Writes manifest.ini, history.csv, snapshots/step_<k>_stage_<l>.csv and
/// model.txt into the output directory.
int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);

struct GradcheckOptions {
  std::vector<std::size_t> dims = {6, 4, 3};  // input dim, then M per stage
  std::vector<std::size_t> n = {3, 2};
  std::size_t items = 5;
  std::size_t coords = 50;
  double h = 1e-5;
  double tolerance = 1e-6;
  std::uint64_t seed = 1;
};

struct GradcheckReport {
  double worst = 0.0;
  std::string worst_coordinate;
  std::size_t checked = 0;
};

/// Random chain and dataset; compares analytic gradients with central
/// differences, relative error |a - fd| / max(1, |a|).
GradcheckReport run_gradcheck(const GradcheckOptions& opts);
int cmd_gradcheck(const GradcheckOptions& opts, std::ostream& out, std::ostream& err);

struct GenDataOptions {
  std::string mode = "independent";
  bool enumerate = false;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  std::filesystem::path out;  // empty: write to `out` stream
};

int cmd_gen_data(const GenDataOptions& opts, std::ostream& out, std::ostream& err);

struct RenderOptions {
  std::filesystem::path snapshot_dir;
  std::size_t stage = 1;  // one-based
  std::filesystem::path out;
};

/// Builds the combined waterfall image at `out` plus one `<stem>_y<k>.pgm`
/// per code index next to it.
int cmd_render(const RenderOptions& opts, std::ostream& out, std::ostream& err);

struct EvalOptions {
  std::filesystem::path model;
  std::size_t mc = 0;  // Monte-Carlo draws per item; 0 disables
  bool diagnostics = false;
  std::uint64_t seed = 1;
};

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace svq::cli
