// svq: train, check and inspect stochastic vector quantiser chains.

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "svq/cli.hpp"

namespace {

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic vector quantiser toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out_path;
  auto* seed_opt = app.add_option("--seed", seed, "Random seed")->capture_default_str();
  auto* out_opt = app.add_option("--out", out_path, "Output path (file or directory)");
  // Global flags may also follow the subcommand name.
  app.fallthrough();

  svq::cli::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Run an experiment config");
  train_cmd->add_option("config", train.config, "Experiment config (.ini)")->required();

  svq::cli::GradcheckOptions grad;
  std::string dims = "6,4,3";
  std::string ns = "3,2";
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  grad_cmd->add_option("--dims", dims, "Input dim then M per stage")->capture_default_str();
  grad_cmd->add_option("--n", ns, "Samples n per stage")->capture_default_str();
  grad_cmd->add_option("--items", grad.items, "Dataset items")->capture_default_str();
  grad_cmd->add_option("--coords", grad.coords, "Random coordinates to check")->capture_default_str();
  grad_cmd->add_option("--step", grad.h, "Central difference step")->capture_default_str();
  grad_cmd->add_option("--tolerance", grad.tolerance, "Worst allowed relative error")->capture_default_str();

  svq::cli::GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write synthetic scene vectors as CSV");
  gen_cmd->add_option("--mode", gen.mode, "independent | correlated")->capture_default_str();
  auto* enum_flag = gen_cmd->add_flag("--enumerate", gen.enumerate, "Exact distribution with probabilities");
  gen_cmd->add_option("--count", gen.count, "Number of sampled rows")->excludes(enum_flag);

  svq::cli::RenderOptions render;
  auto* render_cmd = app.add_subcommand("render", "Stack snapshots into PGM waterfalls");
  render_cmd->add_option("snapshot_dir", render.snapshot_dir, "Directory of step_*_stage_*.csv")->required();
  render_cmd->add_option("--stage", render.stage, "Stage index (1-based)")->capture_default_str();

  svq::cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model");
  eval_cmd->add_option("model", eval.model, "model.txt")->required();
  eval_cmd->add_option("--mc", eval.mc, "Monte-Carlo draws per item for the identity check");
  eval_cmd->add_flag("--diagnostics", eval.diagnostics, "Peak profiles and invariance scores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : svq::cli::kExitBadInput;
  }

  auto& out = std::cout;
  auto& err = std::cerr;
  if (train_cmd->parsed()) {
    if (seed_opt->count()) train.seed = seed;
    if (out_opt->count()) train.out = out_path;
    return svq::cli::cmd_train(train, out, err);
  }
  if (grad_cmd->parsed()) {
    try {
      grad.dims = parse_list(dims);
      grad.n = parse_list(ns);
    } catch (const std::exception&) {
      err << "error: --dims and --n take comma-separated positive integers\n";
      return svq::cli::kExitBadInput;
    }
    grad.seed = seed;
    return svq::cli::cmd_gradcheck(grad, out, err);
  }
  if (gen_cmd->parsed()) {
    gen.seed = seed;
    gen.out = out_path;
    return svq::cli::cmd_gen_data(gen, out, err);
  }
  if (render_cmd->parsed()) {
    if (!out_opt->count()) {
      err << "error: render needs --out <combined.pgm>\n";
      return svq::cli::kExitBadInput;
    }
    render.out = out_path;
    return svq::cli::cmd_render(render, out, err);
  }
  if (eval_cmd->parsed()) {
    eval.seed = seed;
    return svq::cli::cmd_eval(eval, out, err);
  }
  return svq::cli::kExitBadInput;
}
