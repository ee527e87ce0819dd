#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "svq/errors.hpp"
#include "svq/gradients.hpp"

using namespace svq;
using doctest::Approx;

namespace {

double rel_error(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
}

// Central difference of weight * (d1 + d2) with respect to input component j.
double fd_input(const StageParams& s, std::vector<double> x, std::size_t j, double weight, double h) {
  const double base = x[j];
  x[j] = base + h;
  const double up = stage_bound_terms(s, x).sum();
  x[j] = base - h;
  const double down = stage_bound_terms(s, x).sum();
  return weight * (up - down) / (2.0 * h);
}

}  // namespace

TEST_CASE("stage_local_gradients") {
  SUBCASE("zero residuals give zero gradients") {
    Rng rng(1);
    auto s = test::random_stage(rng, 4, 3, 5);
    const auto x = test::random_vector(rng, 5);
    for (std::size_t y = 0; y < 4; ++y) std::copy(x.begin(), x.end(), s.recons.row(y).begin());
    const auto g = stage_local_gradients(s, x, 1.0);
    for (double v : g.grads.g_w.flat()) CHECK(std::abs(v) <= 1e-14);
    for (double v : g.grads.g_b) CHECK(std::abs(v) <= 1e-14);
    for (double v : g.grads.g_x.flat()) CHECK(std::abs(v) <= 1e-14);
    for (double v : g.g_input) CHECK(std::abs(v) <= 1e-14);
  }

  SUBCASE("n = 1 carries only the d1 part") {
    // With n = 1 the recon gradient is -4 P(y) (x - x'(y)) exactly.
    Rng rng(2);
    const auto s = test::random_stage(rng, 3, 1, 4);
    const auto x = test::random_vector(rng, 4);
    const auto P = test::naive_posterior(s, x);
    const auto g = stage_local_gradients(s, x, 1.0);
    for (std::size_t y = 0; y < 3; ++y)
      for (std::size_t j = 0; j < 4; ++j)
        CHECK(g.grads.g_x(y, j) == Approx(-4.0 * P[y] * (x[j] - s.recons(y, j))).epsilon(1e-12));
  }

  SUBCASE("matches central differences, including the input gradient") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const auto s = test::random_stage(rng, 2, 2, 3);
      const auto x = test::random_vector(rng, 3);
      const double weight = rng.uniform(0.2, 3.0);
      const auto g = stage_local_gradients(s, x, weight);

      ChainParams chain{{s}, {weight}};
      const auto data = WeightedDataset::from_items({x}, {1.0});
      for (const auto& a : all_addresses(chain)) {
        const double fd = finite_difference_gradient(chain, data, a, 1e-5);
        double analytic = 0.0;
        switch (a.family) {
          case ParamFamily::weight: analytic = g.grads.g_w(a.row, a.col); break;
          case ParamFamily::bias: analytic = g.grads.g_b[a.row]; break;
          case ParamFamily::recon: analytic = g.grads.g_x(a.row, a.col); break;
        }
        REQUIRE(rel_error(analytic, fd) <= 1e-6);
      }
      for (std::size_t j = 0; j < 3; ++j) REQUIRE(rel_error(g.g_input[j], fd_input(s, x, j, weight, 1e-5)) <= 1e-6);
    }
  }

  SUBCASE("finite for saturated sigmoids") {
    Rng rng(4);
    auto s = test::random_stage(rng, 5, 3, 4);
    s.biases = {1e3, -1e3, 900.0, -900.0, 0.0};
    const auto g = stage_local_gradients(s, test::random_vector(rng, 4), 1.0);
    for (double v : g.grads.g_w.flat()) CHECK(std::isfinite(v));
    for (double v : g.grads.g_b) CHECK(std::isfinite(v));
    for (double v : g.g_input) CHECK(std::isfinite(v));
  }
}

TEST_CASE("chain_gradients") {
  SUBCASE("one stage is the weighted sum of local gradients") {
    Rng rng(10);
    const auto chain = test::random_chain(rng, {4, 3}, {2});
    const auto data = test::random_dataset(rng, 6, 4);
    const auto res = chain_gradients(chain, data);
    auto expect = StageGradients::zeros_like(chain.stages[0]);
    for (std::size_t i = 0; i < data.size(); ++i)
      expect += stage_local_gradients(chain.stages[0], data.item(i), data.probs[i] * chain.stage_weights[0]).grads;
    const auto& got = res.grads.per_stage[0];
    for (std::size_t k = 0; k < got.g_w.size(); ++k) CHECK(got.g_w.flat()[k] == Approx(expect.g_w.flat()[k]).epsilon(1e-12));
    for (std::size_t k = 0; k < got.g_x.size(); ++k) CHECK(got.g_x.flat()[k] == Approx(expect.g_x.flat()[k]).epsilon(1e-12));
    for (std::size_t k = 0; k < got.g_b.size(); ++k) CHECK(got.g_b[k] == Approx(expect.g_b[k]).epsilon(1e-12));
    CHECK(res.objective.total == Approx(chain_objective(chain, data).total).epsilon(1e-14));
  }

  SUBCASE("a second stage with zero weight contributes nothing") {
    Rng rng(11);
    auto chain = test::random_chain(rng, {5, 4, 3}, {3, 2});
    chain.stage_weights[1] = 0.0;
    const auto data = test::random_dataset(rng, 5, 5);
    const auto two = chain_gradients(chain, data);
    const ChainParams first{{chain.stages[0]}, {chain.stage_weights[0]}};
    const auto one = chain_gradients(first, data);
    for (std::size_t k = 0; k < one.grads.per_stage[0].g_w.size(); ++k)
      CHECK(two.grads.per_stage[0].g_w.flat()[k] == Approx(one.grads.per_stage[0].g_w.flat()[k]).epsilon(1e-13));
    for (std::size_t k = 0; k < one.grads.per_stage[0].g_b.size(); ++k)
      CHECK(two.grads.per_stage[0].g_b[k] == Approx(one.grads.per_stage[0].g_b[k]).epsilon(1e-13));
    for (double v : two.grads.per_stage[1].g_w.flat()) CHECK(v == 0.0);
    for (double v : two.grads.per_stage[1].g_b) CHECK(v == 0.0);
    for (double v : two.grads.per_stage[1].g_x.flat()) CHECK(v == 0.0);
  }

  SUBCASE("two stages agree with finite differences at every coordinate") {
    Rng rng(12);
    const auto chain = test::random_chain(rng, {6, 4, 3}, {3, 2});
    const auto data = test::random_dataset(rng, 5, 6);
    const auto grads = chain_gradients(chain, data).grads;
    double worst = 0.0;
    for (const auto& a : all_addresses(chain))
      worst = std::max(worst, rel_error(gradient_at(grads, a), finite_difference_gradient(chain, data, a, 1e-5)));
    CHECK(worst <= 1e-6);
  }

  SUBCASE("three stages, several seeds") {
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
      Rng rng(seed);
      const auto chain = test::random_chain(rng, {5, 4, 3, 3}, {2, 3, 4});
      const auto data = test::random_dataset(rng, 4, 5);
      const auto grads = chain_gradients(chain, data).grads;
      for (const auto& a : all_addresses(chain))
        REQUIRE(rel_error(gradient_at(grads, a), finite_difference_gradient(chain, data, a, 1e-5)) <= 1e-6);
    }
  }

  SUBCASE("renormalised doubled probabilities leave gradients unchanged") {
    Rng rng(13);
    const auto chain = test::random_chain(rng, {4, 3, 2}, {2, 2});
    auto data = test::random_dataset(rng, 5, 4);
    const auto base = chain_gradients(chain, data).grads;
    double total = 0.0;
    for (double& p : data.probs) total += (p *= 2.0);
    for (double& p : data.probs) p /= total;
    const auto again = chain_gradients(chain, data).grads;
    for (const auto& a : all_addresses(chain))
      CHECK(gradient_at(again, a) == Approx(gradient_at(base, a)).epsilon(1e-12));
  }

  SUBCASE("no NaN or Inf for large pre-activations") {
    Rng rng(14);
    auto chain = test::random_chain(rng, {4, 5, 3}, {3, 2});
    for (double& w : chain.stages[0].weights.flat()) w *= 250.0;  // |w.x + b| up to ~1e3
    const auto data = test::random_dataset(rng, 8, 4);
    const auto grads = chain_gradients(chain, data).grads;
    for (const auto& a : all_addresses(chain)) CHECK(std::isfinite(gradient_at(grads, a)));
  }
}

TEST_CASE("recon gradient vanishes at the solved stationary point") {
  // Fixed encoder, M = 2: the recon stationarity condition is the linear system
  //   sum_z A(y,z) x'(z) = n sum_i p_i P_i(y) x_i,
  //   A(y,z) = [y == z] sum_i p_i P_i(y) + (n-1) sum_i p_i P_i(y) P_i(z),
  // solved here per component by Cramer's rule.
  Rng rng(30);
  const std::size_t dim = 3;
  const std::size_t n = 3;
  auto s = test::random_stage(rng, 2, n, dim);
  const auto data = test::random_dataset(rng, 6, dim);

  double A[2][2] = {{0, 0}, {0, 0}};
  std::vector<std::vector<double>> B(2, std::vector<double>(dim, 0.0));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> x(data.item(i).begin(), data.item(i).end());
    const auto P = test::naive_posterior(s, x);
    const double p = data.probs[i];
    for (int y = 0; y < 2; ++y) {
      A[y][y] += p * P[y];
      for (int z = 0; z < 2; ++z) A[y][z] += (n - 1.0) * p * P[y] * P[z];
      for (std::size_t j = 0; j < dim; ++j) B[y][j] += n * p * P[y] * x[j];
    }
  }
  const double det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
  for (std::size_t j = 0; j < dim; ++j) {
    s.recons(0, j) = (B[0][j] * A[1][1] - A[0][1] * B[1][j]) / det;
    s.recons(1, j) = (A[0][0] * B[1][j] - B[0][j] * A[1][0]) / det;
  }

  const ChainParams chain{{s}, {1.0}};
  const auto g = chain_gradients(chain, data).grads.per_stage[0];
  for (double v : g.g_x.flat()) CHECK(std::abs(v) <= 1e-13);
}

TEST_CASE("finite_difference_gradient") {
  Rng rng(40);
  SUBCASE("zero stage weights") {
    auto chain = test::random_chain(rng, {3, 2}, {2});
    chain.stage_weights[0] = 0.0;
    const auto data = test::random_dataset(rng, 3, 3);
    for (const auto& a : all_addresses(chain))
      CHECK(std::abs(finite_difference_gradient(chain, data, a, 1e-5)) <= 1e-12);
  }
  SUBCASE("exact for a quadratic recon coordinate") {
    // Frozen uniform posterior: F is quadratic in each recon coordinate.
    auto chain = ChainParams{{StageParams::zeros(3, 2, 2)}, {1.0}};
    for (double& v : chain.stages[0].recons.flat()) v = rng.uniform(0.0, 1.0);
    const auto data = test::random_dataset(rng, 4, 2);
    const ParamAddress a{0, ParamFamily::recon, 1, 0};
    const double analytic = gradient_at(chain_gradients(chain, data).grads, a);
    CHECK(finite_difference_gradient(chain, data, a, 0.5) == Approx(analytic).epsilon(1e-11));
  }
  SUBCASE("leaves the chain untouched") {
    const auto chain = test::random_chain(rng, {3, 2}, {2});
    const auto copy = chain;
    const auto data = test::random_dataset(rng, 3, 3);
    finite_difference_gradient(chain, data, {0, ParamFamily::bias, 1, 0}, 1e-5);
    CHECK(chain == copy);
  }
  SUBCASE("invalid addresses and steps") {
    const auto chain = test::random_chain(rng, {3, 2}, {2});
    const auto data = test::random_dataset(rng, 3, 3);
    CHECK_THROWS_AS(finite_difference_gradient(chain, data, {1, ParamFamily::bias, 0, 0}, 1e-5), ArgumentError);
    CHECK_THROWS_AS(finite_difference_gradient(chain, data, {0, ParamFamily::weight, 2, 0}, 1e-5), ArgumentError);
    CHECK_THROWS_AS(finite_difference_gradient(chain, data, {0, ParamFamily::recon, 0, 3}, 1e-5), ArgumentError);
    CHECK_THROWS_AS(finite_difference_gradient(chain, data, {0, ParamFamily::bias, 0, 0}, 0.0), ArgumentError);
  }
}
