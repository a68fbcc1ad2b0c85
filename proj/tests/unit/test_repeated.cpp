#include <algorithm>
#include <chrono>
#include <random>

#include "doctest.h"
#include "mzdual/errors.hpp"
#include "mzdual/repeated.hpp"
#include "oracles.hpp"

using namespace mzdual;

namespace {

MatrixGameFamily aumann_maschler() {
  return MatrixGameFamily(2, 1, {Matrix{{1.0, 0.0}, {0.0, 0.0}}, Matrix{{0.0, 0.0}, {0.0, 1.0}}});
}

MatrixGameFamily random_family(std::mt19937_64& rng, std::size_t nk, std::size_t nl,
                               std::size_t ni = 2, std::size_t nj = 2) {
  std::vector<Matrix> m;
  for (std::size_t b = 0; b < nk * nl; ++b) m.push_back(oracle::random_matrix(rng, ni, nj));
  return MatrixGameFamily(nk, nl, std::move(m));
}

JointBelief random_belief(std::mt19937_64& rng, std::size_t nk, std::size_t nl) {
  return JointBelief(nk, nl, oracle::random_simplex_point(rng, nk * nl), 1e-9);
}

// One-shot Bayesian game in pure type-contingent strategies s: K -> I and
// t: L -> J, solved as an ordinary matrix game.
double bayesian_one_shot(const MatrixGameFamily& fam, const JointBelief& pi) {
  const std::size_t nk = fam.num_k(), nl = fam.num_l(), ni = fam.num_i(), nj = fam.num_j();
  std::size_t rows = 1, cols = 1;
  for (std::size_t k = 0; k < nk; ++k) rows *= ni;
  for (std::size_t l = 0; l < nl; ++l) cols *= nj;
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double v = 0.0;
      std::size_t rr = r;
      for (std::size_t k = 0; k < nk; ++k, rr /= ni) {
        std::size_t cc = c;
        for (std::size_t l = 0; l < nl; ++l, cc /= nj)
          v += pi(k, l) * fam.payoff(k, l)(rr % ni, cc % nj);
      }
      m(r, c) = v;
    }
  return solve_matrix_game(m).value;
}

}  // namespace

TEST_CASE("tree sizes") {
  std::mt19937_64 rng(1);
  const auto fam = random_family(rng, 2, 3, 3, 2);
  const auto pi = JointBelief::uniform(2, 3);
  const auto one = build_extensive(fam, pi, Evaluation::uniform(1));
  CHECK(one.row.infosets.size() == 2);
  CHECK(one.row.num_sequences == 1 + 2 * 3);
  CHECK(one.col.num_sequences == 1 + 3 * 2);

  const auto fam2 = random_family(rng, 2, 2);
  const auto two = build_extensive(fam2, JointBelief::uniform(2, 2), Evaluation::uniform(2));
  // Per type: 2 first-stage sequences plus 4 histories times 2 actions.
  CHECK(two.row.num_sequences == 1 + 2 * 10);
  CHECK(two.col.num_sequences == 1 + 2 * 10);
  CHECK(two.row.infosets.size() == 2 * 5);
  CHECK(two.payoff.size() == 4 * 5 * 4);

  const auto point = build_extensive(fam2, JointBelief::point_mass(2, 2, 1, 0), Evaluation::uniform(2));
  CHECK(point.payoff.size() == 5 * 4);
  for (const auto& e : point.payoff) {
    CHECK(e.row_sequence > 10);  // type 1 sequences follow type 0's
    CHECK(e.col_sequence <= 10);
  }
  CHECK_THROWS_AS(build_extensive(fam2, JointBelief::uniform(2, 2), Evaluation::uniform(9)),
                  SizeLimitError);
}

TEST_CASE("evaluations validate") {
  CHECK_THROWS_AS(Evaluation({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(Evaluation({}), ValidationError);
  CHECK_THROWS_AS(Evaluation({1.5, -0.5}), ValidationError);
  CHECK(Evaluation::uniform(4)[3] == 0.25);
}

TEST_CASE("Aumann-Maschler sequence") {
  const auto fam = aumann_maschler();
  const JointBelief half(2, 1, {0.5, 0.5});
  const auto v = value_sequence(fam, half, 4);
  CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-8));
  for (std::size_t n = 1; n < v.size(); ++n) CHECK(v[n] <= v[n - 1] + 1e-8);
  for (double x : v) CHECK(x >= 0.25 - 1e-8);

  // Discretized search over the informed player's one-shot mixed moves.
  double best = -1.0;
  for (int a = 0; a <= 20; ++a)
    for (int b = 0; b <= 20; ++b) {
      const double x1 = a / 20.0, x2 = b / 20.0;  // prob. of top row per type
      const double left = 0.5 * x1, right = 0.5 * (1 - x2);
      best = std::max(best, std::min(left, right));
    }
  CHECK(v[0] == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("one stage equals the Bayesian matrix game") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fam = random_family(rng, 2, 2);
    const auto pi = random_belief(rng, 2, 2);
    const auto s = value_n(fam, pi, Evaluation::uniform(1));
    CHECK(s.value == doctest::Approx(bayesian_one_shot(fam, pi)).epsilon(1e-9));
  }
}

TEST_CASE("complete information repeats the one-shot value") {
  std::mt19937_64 rng(7);
  const auto fam = random_family(rng, 2, 2);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t l = 0; l < 2; ++l) {
      const auto v = value_sequence(fam, JointBelief::point_mass(2, 2, k, l), 3);
      for (double x : v) CHECK(x == doctest::Approx(matrix_game_value(fam.payoff(k, l))).epsilon(1e-8));
    }
}

TEST_CASE("plans are feasible and certify the value") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 4; ++trial) {
    const auto fam = random_family(rng, 2, 2);
    const auto pi = random_belief(rng, 2, 2);
    const Evaluation theta({0.5, 0.3, 0.2});
    const auto form = build_extensive(fam, pi, theta);
    const auto s = solve_extensive(form);
    CHECK(form.row.plan_violation(s.row_plan) <= 1e-9);
    CHECK(form.col.plan_violation(s.col_plan) <= 1e-9);
    CHECK(best_response_col(form, s.row_plan) == doctest::Approx(s.value).epsilon(1e-8));
    CHECK(best_response_row(form, s.col_plan) == doctest::Approx(s.value).epsilon(1e-8));
    CHECK(form.expected_payoff(s.row_plan, s.col_plan) == doctest::Approx(s.value).epsilon(1e-8));
    CHECK(std::abs(s.value) <= fam.max_abs() + 1e-12);
  }
}

TEST_CASE("relabeling actions leaves the value unchanged") {
  std::mt19937_64 rng(13);
  const auto fam = random_family(rng, 2, 2, 3, 2);
  std::vector<Matrix> swapped;
  for (std::size_t b = 0; b < 4; ++b) {
    const Matrix& g = fam.payoff(b / 2, b % 2);
    Matrix h(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 2; ++j) h(i, j) = g((i + 1) % 3, 1 - j);
    swapped.push_back(h);
  }
  const MatrixGameFamily perm(2, 2, swapped);
  const auto pi = random_belief(rng, 2, 2);
  const Evaluation theta = Evaluation::uniform(2);
  CHECK(value_n(perm, pi, theta).value == doctest::Approx(value_n(fam, pi, theta).value).epsilon(1e-10));
}

TEST_CASE("value is Lipschitz in the belief") {
  std::mt19937_64 rng(17);
  const auto fam = random_family(rng, 2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_belief(rng, 2, 2);
    const auto b = random_belief(rng, 2, 2);
    double l1 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) l1 += std::abs(a.probs()[i] - b.probs()[i]);
    const double va = value_n(fam, a, Evaluation::uniform(2)).value;
    const double vb = value_n(fam, b, Evaluation::uniform(2)).value;
    CHECK(std::abs(va - vb) <= fam.max_abs() * l1 + 1e-9);
  }
}

TEST_CASE("four stages on 2x2x2x2 stay fast") {
  std::mt19937_64 rng(19);
  const auto fam = random_family(rng, 2, 2);
  const auto pi = random_belief(rng, 2, 2);
  const auto start = std::chrono::steady_clock::now();
  const auto s = value_n(fam, pi, Evaluation::uniform(4));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 30.0);
  const auto form = build_extensive(fam, pi, Evaluation::uniform(4));
  CHECK(best_response_col(form, s.row_plan) == doctest::Approx(s.value).epsilon(1e-8));
}
