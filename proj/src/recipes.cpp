#include "svq/recipes.hpp"

#include <array>
#include <string>

namespace svq {

namespace {

constexpr std::array kRecipes = {Recipe::independent_factorial, Recipe::correlated_factorial,
                                 Recipe::correlated_factorial_2stage, Recipe::joint,
                                 Recipe::invariant_2stage};

}  // namespace

std::span<const Recipe> all_recipes() { return kRecipes; }

std::string_view recipe_name(Recipe r) {
  switch (r) {
    case Recipe::independent_factorial: return "independent_factorial";
    case Recipe::correlated_factorial: return "correlated_factorial";
    case Recipe::correlated_factorial_2stage: return "correlated_factorial_2stage";
    case Recipe::joint: return "joint";
    case Recipe::invariant_2stage: return "invariant_2stage";
  }
  return "unknown";
}

ExperimentConfig recipe_config(Recipe r, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.output_dir = std::string("runs/") + std::string(recipe_name(r));
  cfg.scene.mode = r == Recipe::independent_factorial ? SceneMode::independent : SceneMode::correlated;
  auto& phases = cfg.schedule.phases;
  switch (r) {
    case Recipe::independent_factorial:
    case Recipe::correlated_factorial:
      cfg.stages = {{16, 20}};
      phases = {{0.2, 500, {1.0}}, {0.1, 500, {1.0}}};
      break;
    case Recipe::correlated_factorial_2stage:
      cfg.stages = {{16, 20}, {16, 20}};
      phases = {{0.2, 500, {1.0, 1.0}}, {0.1, 500, {1.0, 1.0}}};
      break;
    case Recipe::joint:
      cfg.stages = {{16, 3}};
      phases = {{0.2, 500, {1.0}}, {0.1, 500, {1.0}}, {0.05, 1000, {1.0}}};
      break;
    case Recipe::invariant_2stage:
      cfg.stages = {{16, 3}, {16, 3}};
      phases = {{0.2, 500, {1.0, 5.0}},
                {0.1, 500, {1.0, 10.0}},
                {0.05, 500, {1.0, 20.0}},
                {0.05, 500, {1.0, 40.0}}};
      break;
  }
  return cfg;
}

}  // namespace svq
