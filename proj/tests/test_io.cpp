#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "svq/config.hpp"
#include "svq/errors.hpp"
#include "svq/model_io.hpp"
#include "svq/pgm.hpp"
#include "svq/recipes.hpp"

using namespace svq;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal =
    "[scene]\n"
    "mode = independent\n"
    "[stage.1]\n"
    "M = 4\n"
    "n = 2\n"
    "[phase.1]\n"
    "epsilon = 0.1\n"
    "steps = 3\n";

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("defaults fill unspecified keys") {
    const auto c = parse(kMinimal);
    CHECK(c.scene == SceneConfig{});
    CHECK(c.stages == std::vector<StageShape>{{4, 2}});
    REQUIRE(c.schedule.phases.size() == 1);
    CHECK(c.schedule.phases[0].stage_weights == std::vector<double>{1.0});
    CHECK(c.seed == 1);
    CHECK(c.snapshot_every == 25);
    CHECK(c.bias_normalizer == BiasNormalizer::gradient);
  }
  SUBCASE("comments and whitespace") {
    const auto c = parse(std::string("# top\n; also\n") + kMinimal + "[run]\n  seed = 7   # trailing\n");
    CHECK(c.seed == 7);
  }
  SUBCASE("chain_spec applies the linking rule") {
    const auto spec = recipe_config(Recipe::invariant_2stage, 1).chain_spec();
    REQUIRE(spec.size() == 2);
    CHECK(spec[0].input_dim == 24);
    CHECK(spec[1].input_dim == 16);
  }
  SUBCASE("errors carry the source line") {
    CHECK(error_of(std::string(kMinimal) + "bogus = 1\n") == "test.ini:9: unknown key 'bogus' in section [phase.1]");
    CHECK(error_of(std::string(kMinimal) + "[weird]\n").rfind("test.ini:9: unknown section [weird]", 0) == 0);
    CHECK(error_of(std::string(kMinimal) + "steps = 4\n").rfind("test.ini:9: duplicate key 'steps'", 0) == 0);
    CHECK(error_of("[scene]\nmode = sideways\n[stage.1]\nM = 1\nn = 1\n[phase.1]\nepsilon = 1\nsteps = 1\n").rfind("test.ini:2:", 0) == 0);
    CHECK(error_of("[scene]\nmode = independent\n[stage.1]\nM = x\nn = 1\n[phase.1]\nepsilon = 1\nsteps = 1\n").rfind("test.ini:4:", 0) == 0);
    CHECK(error_of("[scene]\nmode = independent\n[stage.1]\nM = 2\nn = 1\n[phase.1]\nepsilon = -1\nsteps = 1\n").rfind("test.ini:6:", 0) == 0);
    CHECK(error_of("[scene]\nmode = independent\n[stage.1]\nM = 2\nn = 1\n[phase.1]\nepsilon = 1\nsteps = 1\nstage_weights = 1, 2\n").rfind("test.ini:9:", 0) == 0);
    CHECK(error_of("[scene]\nmode = independent\n[stage.2]\nM = 2\nn = 1\n[phase.1]\nepsilon = 1\nsteps = 1\n").rfind("test.ini:3:", 0) == 0);
    CHECK(error_of("[stage.1]\nM = 2\nn = 1\n").find("missing [scene]") != std::string::npos);
    CHECK(error_of("x = 1\n").rfind("test.ini:1: key outside of any section", 0) == 0);
    CHECK(error_of("[scene\n").rfind("test.ini:1: unterminated section header", 0) == 0);
  }
  SUBCASE("missing file is an I/O error") {
    CHECK_THROWS_AS(load_config("/nonexistent/path.ini"), IoError);
  }
}

TEST_CASE("config round trips") {
  for (Recipe r : all_recipes()) {
    CAPTURE(std::string(recipe_name(r)));
    auto c = recipe_config(r, 9);
    c.bias_normalizer = BiasNormalizer::literal;
    c.scene.half_width = 1.2749263293656174;
    CHECK(parse(format_config(c)) == c);
    const auto m = parse(format_manifest(c));
    CHECK(m == c);
    CHECK(format_manifest(c).find("[manifest]") != std::string::npos);
  }
}

TEST_CASE("bundled configs equal the recipes") {
  const std::filesystem::path dir = std::filesystem::path(SVQ_SOURCE_DIR) / "configs";
  for (Recipe r : all_recipes()) {
    CAPTURE(std::string(recipe_name(r)));
    const auto path = dir / (std::string(recipe_name(r)) + ".ini");
    CHECK(load_config(path) == recipe_config(r, 1));
  }
}

TEST_CASE("recipe contents") {
  const auto f = recipe_config(Recipe::independent_factorial, 3);
  CHECK(f.seed == 3);
  CHECK(f.scene.mode == SceneMode::independent);
  CHECK(f.stages == std::vector<StageShape>{{16, 20}});
  CHECK(f.schedule.total_steps() == 1000);
  const auto j = recipe_config(Recipe::joint, 1);
  CHECK(j.stages == std::vector<StageShape>{{16, 3}});
  CHECK(j.schedule.total_steps() == 2000);
  CHECK(j.schedule.phases[2].epsilon == 0.05);
  const auto inv = recipe_config(Recipe::invariant_2stage, 1);
  REQUIRE(inv.schedule.phases.size() == 4);
  CHECK(inv.schedule.phases[0].stage_weights == std::vector<double>{1.0, 5.0});
  CHECK(inv.schedule.phases[3].stage_weights == std::vector<double>{1.0, 40.0});
  const auto two = recipe_config(Recipe::correlated_factorial_2stage, 1);
  CHECK(two.stages == std::vector<StageShape>{{16, 20}, {16, 20}});
  CHECK(two.schedule.phases[0].stage_weights == std::vector<double>{1.0, 1.0});
}

TEST_CASE("model files") {
  Rng rng(1);
  SceneConfig scene;
  scene.mode = SceneMode::correlated;
  scene.half_width = 0.1 + 0.2;
  Model m{test::random_chain(rng, {24, 7, 3}, {3, 2}), scene};
  m.chain.stages[0].weights(0, 0) = 1e-300;
  m.chain.stages[0].biases[1] = -123456.78901234567;
  std::stringstream ss;
  write_model(ss, m);
  const auto back = read_model(ss);
  CHECK(back.chain == m.chain);
  CHECK(back.scene == m.scene);

  std::string text;
  {
    std::ostringstream o;
    write_model(o, m);
    text = o.str();
  }
  CHECK(text.rfind("svq-model 1\n", 0) == 0);
  auto bad = [](std::string t) {
    std::istringstream in(t);
    return read_model(in);
  };
  CHECK_THROWS_AS(bad("not a model\n"), ConfigError);
  CHECK_THROWS_AS(bad(text.substr(0, text.size() / 2)), ConfigError);
  std::string broken = text;
  broken.replace(broken.find("stages 2"), 8, "stages 3");
  CHECK_THROWS_AS(bad(broken), ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "svq_test_model.txt";
  save_model(path, m);
  CHECK(load_model(path).chain == m.chain);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), IoError);
}

TEST_CASE("CSV files") {
  SUBCASE("recons round trip") {
    Rng rng(2);
    Matrix r(3, 4);
    for (double& v : r.flat()) v = rng.uniform(-1.0, 1.0);
    std::stringstream ss;
    write_recons_csv(ss, r);
    const std::string text = ss.str();
    CHECK(text.rfind("1,", 0) == 0);
    CHECK(text.find("\n3,") != std::string::npos);
    CHECK(read_recons_csv(ss) == r);
  }
  SUBCASE("ragged rows") {
    std::istringstream in("1,0.5,0.5\n2,0.5\n");
    CHECK_THROWS_AS(read_recons_csv(in), ConfigError);
  }
  SUBCASE("dataset rows") {
    const auto d = WeightedDataset::from_items({{1.0, 2.0}, {3.0, 4.5}}, {0.25, 0.75});
    std::ostringstream a, b;
    write_dataset_csv(a, d, false);
    write_dataset_csv(b, d, true);
    CHECK(a.str() == "1,2\n3,4.5\n");
    CHECK(b.str() == "0.25,1,2\n0.75,3,4.5\n");
  }
}

TEST_CASE("PGM") {
  CHECK(to_gray(-1.0) == 0);
  CHECK(to_gray(0.0) == 0);
  CHECK(to_gray(0.5) == 128);
  CHECK(to_gray(1.0) == 255);
  CHECK(to_gray(7.0) == 255);
  CHECK(to_gray(std::nan("")) == 0);

  GrayImage img(3, 2);
  img.at(0, 0) = 1;
  img.at(2, 1) = 200;
  std::ostringstream out;
  write_pgm(out, img);
  const std::string bytes = out.str();
  CHECK(bytes.rfind("P5\n3 2\n255\n", 0) == 0);
  CHECK(bytes.size() == std::string("P5\n3 2\n255\n").size() + 6);
  std::istringstream in(bytes);
  const auto back = read_pgm(in);
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.pixels == img.pixels);
  std::istringstream junk("P2\n1 1\n255\n0");
  CHECK_THROWS_AS(read_pgm(junk), ConfigError);
}
