#pragma once

// The five training recipes of the factorial / joint / invariant coding
// experiments. Bundled configs under configs/ mirror these.

#include <cstdint>
#include <span>
#include <string_view>

#include "svq/config.hpp"

namespace svq {

enum class Recipe {
  independent_factorial,        // independent objects, M=16, n=20
  correlated_factorial,         // correlated objects, 1 stage, n=20
  correlated_factorial_2stage,  // correlated objects, 2 equal-weight stages, n=20
  joint,                        // correlated objects, 1 stage, n=3
  invariant_2stage,             // correlated objects, 2 stages, n=3, s ramps 5..40
};

std::span<const Recipe> all_recipes();
std::string_view recipe_name(Recipe r);
ExperimentConfig recipe_config(Recipe r, std::uint64_t seed);

}  // namespace svq
