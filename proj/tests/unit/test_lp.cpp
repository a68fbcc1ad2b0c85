#include <random>

#include "doctest.h"
#include "mzdual/errors.hpp"
#include "mzdual/lp.hpp"
#include "oracles.hpp"

using mzdual::Matrix;
using namespace mzdual::lp;

TEST_CASE("max x s.t. x <= 3") {
  Problem p;
  p.objective = {1.0};
  p.constraints = Matrix{{1.0}};
  p.relations = {Relation::kLessEqual};
  p.rhs = {3.0};
  const Solution s = solve(p);
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.dual[0] == doctest::Approx(1.0));
  CHECK(s.slackness_residual <= 1e-9);
}

TEST_CASE("infeasible and unbounded are distinguished") {
  Problem inf;
  inf.objective = {1.0};
  inf.constraints = Matrix{{1.0}, {1.0}};
  inf.relations = {Relation::kLessEqual, Relation::kGreaterEqual};
  inf.rhs = {1.0, 2.0};
  CHECK(solve(inf).status == Status::kInfeasible);
  CHECK_THROWS_AS(solve_or_throw(inf), mzdual::LpError);

  Problem unb;
  unb.objective = {1.0, 1.0};
  unb.constraints = Matrix{{1.0, -1.0}};
  unb.relations = {Relation::kLessEqual};
  unb.rhs = {1.0};
  CHECK(solve(unb).status == Status::kUnbounded);
}

TEST_CASE("equality rows, negative rhs and free variables") {
  // max x - y  s.t. x + y = 2, x - y >= -4 (written with negative rhs), y free.
  Problem p;
  p.objective = {1.0, -1.0};
  p.constraints = Matrix{{1.0, 1.0}, {-1.0, 1.0}, {1.0, 0.0}};
  p.relations = {Relation::kEqual, Relation::kLessEqual, Relation::kLessEqual};
  p.rhs = {2.0, 4.0, 5.0};
  p.free_vars = {false, true};
  const Solution s = solve(p);
  REQUIRE(s.optimal());
  // x = 5, y = -3 gives 8.
  CHECK(s.objective == doctest::Approx(8.0));
  CHECK(s.primal[1] == doctest::Approx(-3.0));
  CHECK(s.slackness_residual <= 1e-9);
  double dual_obj = 0.0;
  for (std::size_t i = 0; i < 3; ++i) dual_obj += p.rhs[i] * s.dual[i];
  CHECK(dual_obj == doctest::Approx(s.objective));
}

TEST_CASE("degenerate LP with redundant constraints terminates") {
  // Classic cycling example (Beale) under textbook Dantzig pivoting.
  Problem p;
  p.objective = {0.75, -150.0, 0.02, -6.0};
  p.constraints = Matrix{{0.25, -60.0, -0.04, 9.0},
                         {0.5, -90.0, -0.02, 3.0},
                         {0.0, 0.0, 1.0, 0.0},
                         {0.0, 0.0, 1.0, 0.0},
                         {0.25, -60.0, -0.04, 9.0}};
  p.relations.assign(5, Relation::kLessEqual);
  p.rhs = {0.0, 0.0, 1.0, 1.0, 0.0};
  for (PivotRule rule : {PivotRule::kBland, PivotRule::kDantzig}) {
    Options o;
    o.rule = rule;
    const Solution s = solve(p, o);
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(0.05));
    CHECK(s.pivots < 100);
  }
}

TEST_CASE("redundant equality rows are tolerated") {
  Problem p;
  p.objective = {1.0, 2.0};
  p.constraints = Matrix{{1.0, 1.0}, {2.0, 2.0}};
  p.relations = {Relation::kEqual, Relation::kEqual};
  p.rhs = {1.0, 2.0};
  const Solution s = solve(p);
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(2.0));
}

TEST_CASE("random bounded LPs match vertex enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> nvars(1, 3), ncons(1, 4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = nvars(rng), m = ncons(rng);
    // Random rows plus a box x_j <= 2 keep the LP bounded; rhs >= -0.2 may
    // make it infeasible, which both sides must agree on.
    Matrix a(m + n, n);
    std::vector<double> b(m + n), c(n);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng);
      b[i] = u(rng) + 0.8;
    }
    for (std::size_t j = 0; j < n; ++j) {
      a(m + j, j) = 1.0;
      b[m + j] = 2.0;
      c[j] = u(rng);
    }
    Problem p{c, a, std::vector<Relation>(m + n, Relation::kLessEqual), b, {}};
    const Solution s = solve(p);
    const auto expected = oracle::lp_by_vertex_enumeration(c, a, b);
    if (!expected) {
      CHECK(s.status == Status::kInfeasible);
      continue;
    }
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(*expected).epsilon(1e-9));
    CHECK(s.slackness_residual <= 1e-9);
  }
}

TEST_CASE("perturbed solves agree with plain ones") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3, m = 4;
    Matrix a(m + n, n);
    std::vector<double> b(m + n), c(n);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng);
      // Half the rows pass through the origin to create degeneracy.
      b[i] = trial % 2 ? 0.0 : u(rng) + 1.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
      a(m + j, j) = 1.0;
      b[m + j] = 1.0;
      c[j] = u(rng);
    }
    Problem p{c, a, std::vector<Relation>(m + n, Relation::kLessEqual), b, {}};
    Options o;
    o.perturb = true;
    const Solution plain = solve(p), pert = solve(p, o);
    REQUIRE(plain.optimal());
    REQUIRE(pert.optimal());
    CHECK(pert.objective == doctest::Approx(plain.objective).epsilon(1e-10));
    CHECK(pert.slackness_residual <= 1e-9);
    for (std::size_t i = 0; i < m + n; ++i)
      CHECK(mzdual::dot(a.row(i), pert.primal) <= b[i] + 1e-10);
  }
}
