#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "mzdual/belief.hpp"
#include "mzdual/errors.hpp"
#include "oracles.hpp"

using namespace mzdual;

TEST_CASE("decompose and compose round trip") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto probs = oracle::random_simplex_point(rng, 6);
    const JointBelief pi(2, 3, probs, 1e-9);
    const auto dk = decompose_k(pi);
    const auto back_k = compose_k(dk.marginal, dk.conditionals);
    const auto dl = decompose_l(pi);
    const auto back_l = compose_l(dl.marginal, dl.conditionals);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(back_k.probs()[i] == doctest::Approx(probs[i]).epsilon(1e-12));
      CHECK(back_l.probs()[i] == doctest::Approx(probs[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero-mass rows decompose to uniform conditionals") {
  const auto pi = JointBelief::point_mass(2, 2, 0, 1);
  const auto d = decompose_k(pi);
  CHECK(d.marginal[0] == 1.0);
  CHECK(d.conditionals(0, 1) == 1.0);
  CHECK(d.conditionals(1, 0) == 0.5);
  CHECK(d.conditionals(1, 1) == 0.5);
}

TEST_CASE("belief validation") {
  CHECK_THROWS_AS(JointBelief(2, 2, {0.5, 0.5, 0.1, 0.0}), ValidationError);
  CHECK_THROWS_AS(JointBelief(2, 2, {1.2, -0.2, 0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(JointBelief(2, 2, {1.0, 0.0, 0.0}), ValidationError);
  CHECK_NOTHROW(JointBelief(2, 2, {0.25, 0.25, 0.25, 0.25}));
}

TEST_CASE("grid size and ranking") {
  CHECK(SimplexGrid::count(3, 4) == 15);
  CHECK(SimplexGrid::count(4, 10) == 286);
  const SimplexGrid g(4, 5);
  CHECK(g.size() == SimplexGrid::count(4, 5));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto mi = g.multi_index(i);
    CHECK(std::accumulate(mi.begin(), mi.end(), 0) == 5);
    CHECK(g.index_of(mi) == i);
  }
  std::size_t vertices = 0;
  for (std::size_t i = 0; i < g.size(); ++i) vertices += g.is_vertex(i);
  CHECK(vertices == 4);
  CHECK_THROWS_AS(SimplexGrid(10, 100, 1000), SizeLimitError);
}

TEST_CASE("Kuhn interpolation reproduces affine functions") {
  std::mt19937_64 rng(5);
  auto grid = std::make_shared<const SimplexGrid>(4, 6);
  const std::vector<double> a = {0.3, -1.2, 2.0, 0.7};
  const auto table = tabulate(grid, [&](const std::vector<double>& x) {
    return a[0] * x[0] + a[1] * x[1] + a[2] * x[2] + a[3] * x[3];
  });
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = oracle::random_simplex_point(rng, 4, trial % 2 == 0);
    const auto w = kuhn_weights(*grid, x);
    double total = 0.0;
    std::vector<double> rebuilt(4, 0.0);
    for (auto [idx, wt] : w) {
      CHECK(wt > 0.0);
      total += wt;
      for (std::size_t c = 0; c < 4; ++c) rebuilt[c] += wt * grid->coordinate(idx, c);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t c = 0; c < 4; ++c) CHECK(rebuilt[c] == doctest::Approx(x[c]).epsilon(1e-12));
    CHECK(table.interpolate(x) ==
          doctest::Approx(a[0] * x[0] + a[1] * x[1] + a[2] * x[2] + a[3] * x[3]).epsilon(1e-12));
  }
  // Exact at grid nodes.
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto w = kuhn_weights(*grid, grid->point(i));
    REQUIRE(w.size() == 1);
    CHECK(w[0].first == i);
  }
  CHECK_THROWS_AS(kuhn_weights(*grid, std::vector<double>{0.5, 0.5, 0.1, 0.0}), DomainError);
}

TEST_CASE("value tables reject non-finite values") {
  auto grid = std::make_shared<const SimplexGrid>(2, 2);
  CHECK_THROWS_AS(ValueTable(grid, {0.0, NAN, 1.0}), ValidationError);
  CHECK_THROWS_AS(ValueTable(grid, {0.0, 1.0}), ValidationError);
}

TEST_CASE("product grid flattening") {
  auto a = std::make_shared<const SimplexGrid>(2, 3);
  auto b = std::make_shared<const SimplexGrid>(3, 2);
  const ProductGrid pg({a, b});
  CHECK(pg.size() == a->size() * b->size());
  for (std::size_t i = 0; i < pg.size(); ++i) {
    const auto parts = pg.unflatten(i);
    CHECK(pg.flatten(parts) == i);
  }
  CHECK(pg.unflatten(1)[1] == 1);
}
