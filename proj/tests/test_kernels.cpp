#include <omp.h>

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "svq/gradients.hpp"
#include "svq/reference.hpp"
#include "svq/scene.hpp"

using namespace svq;
using doctest::Approx;

namespace {

void check_close(const GradientSet& a, const GradientSet& b, const ChainParams& chain, double tol) {
  for (const auto& addr : all_addresses(chain)) {
    const double x = gradient_at(a, addr);
    const double y = gradient_at(b, addr);
    REQUIRE(std::abs(x - y) <= tol * std::max(1.0, std::abs(y)));
  }
}

bool bitwise_equal(const GradientResult& a, const GradientResult& b) {
  if (a.objective.total != b.objective.total) return false;
  if (a.objective.per_stage != b.objective.per_stage) return false;
  for (std::size_t l = 0; l < a.grads.per_stage.size(); ++l) {
    const auto& x = a.grads.per_stage[l];
    const auto& y = b.grads.per_stage[l];
    if (!(x.g_w == y.g_w && x.g_b == y.g_b && x.g_x == y.g_x)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
  Rng rng(5);
  SUBCASE("random chains") {
    for (int trial = 0; trial < 5; ++trial) {
      const auto chain = test::random_chain(rng, {6, 5, 4, 3}, {3, 2, 4});
      const auto data = test::random_dataset(rng, 37, 6);
      const auto fast = chain_gradients(chain, data);
      const auto slow = reference::chain_gradients(chain, data);
      CHECK(fast.objective.total == Approx(slow.objective.total).epsilon(1e-12));
      CHECK(chain_objective(chain, data).total == Approx(reference::chain_objective(chain, data).total).epsilon(1e-12));
      check_close(fast.grads, slow.grads, chain, 1e-12);
    }
  }
  SUBCASE("scene dataset") {
    const SceneConfig cfg;
    const auto data = enumerate_distribution(cfg);
    const auto chain = test::random_chain(rng, {24, 16, 16}, {20, 3});
    const auto fast = chain_gradients(chain, data);
    const auto slow = reference::chain_gradients(chain, data);
    CHECK(fast.objective.total == Approx(slow.objective.total).epsilon(1e-12));
    check_close(fast.grads, slow.grads, chain, 1e-11);
  }
}

TEST_CASE("results do not depend on the thread count") {
  Rng rng(6);
  const auto chain = test::random_chain(rng, {24, 16, 16}, {20, 3});
  const auto data = enumerate_distribution(SceneConfig{});
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = chain_gradients(chain, data);
  const auto obj_one = chain_objective(chain, data);
  omp_set_num_threads(4);
  const auto four = chain_gradients(chain, data);
  const auto obj_four = chain_objective(chain, data);
  omp_set_num_threads(saved);
  CHECK(bitwise_equal(one, four));
  CHECK(obj_one.total == obj_four.total);
  CHECK(obj_one.per_stage == obj_four.per_stage);
}
