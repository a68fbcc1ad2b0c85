#include "mzdual/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mzdual/errors.hpp"
#include "mzdual/lp.hpp"

namespace mzdual {

GameSolution solve_matrix_game(const Matrix& payoff) {
  const std::size_t ni = payoff.rows(), nj = payoff.cols();
  if (ni == 0 || nj == 0) throw ValidationError("matrix game with an empty action set");
  double lo = payoff(0, 0);
  for (double v : payoff.data()) {
    if (!std::isfinite(v)) throw ValidationError("matrix game entry is not finite");
    lo = std::min(lo, v);
  }
  // Shift so every entry is >= 1; the game then has value >= 1 and the
  // reciprocal formulation below is bounded and feasible at y = 0.
  const double shift = 1.0 + std::abs(lo);

  // Column player: max sum y  s.t.  (A + shift) y <= 1, y >= 0.
  // Then value' = 1 / sum y, col = y / sum y; the row multipliers give the
  // row strategy.
  lp::Problem lp;
  lp.objective.assign(nj, 1.0);
  lp.constraints = Matrix(ni, nj);
  for (std::size_t i = 0; i < ni; ++i)
    for (std::size_t j = 0; j < nj; ++j) lp.constraints(i, j) = payoff(i, j) + shift;
  lp.relations.assign(ni, lp::Relation::kLessEqual);
  lp.rhs.assign(ni, 1.0);
  const lp::Solution s = lp::solve_or_throw(lp);

  double total = 0.0;
  for (double y : s.primal) total += y;
  if (!(total > 0.0)) throw LpError("matrix game LP returned a zero column plan");
  GameSolution g;
  g.value = 1.0 / total - shift;
  g.optimal_col.resize(nj);
  for (std::size_t j = 0; j < nj; ++j) g.optimal_col[j] = s.primal[j] / total;
  double dual_total = 0.0;
  for (double x : s.dual) dual_total += std::max(x, 0.0);
  g.optimal_row.resize(ni);
  for (std::size_t i = 0; i < ni; ++i) g.optimal_row[i] = std::max(s.dual[i], 0.0) / dual_total;
  return g;
}

double matrix_game_value(const Matrix& payoff) { return solve_matrix_game(payoff).value; }

MatrixGameFamily::MatrixGameFamily(std::size_t num_k, std::size_t num_l,
                                   std::vector<Matrix> payoffs)
    : num_k_(num_k), num_l_(num_l), payoffs_(std::move(payoffs)) {
  if (num_k_ == 0 || num_l_ == 0) throw ValidationError("family needs |K|, |L| >= 1");
  if (payoffs_.size() != num_k_ * num_l_)
    throw ValidationError("family has " + std::to_string(payoffs_.size()) +
                          " matrices, expected " + std::to_string(num_k_ * num_l_));
  num_i_ = payoffs_.front().rows();
  num_j_ = payoffs_.front().cols();
  if (num_i_ == 0 || num_j_ == 0) throw ValidationError("family needs |I|, |J| >= 1");
  for (std::size_t b = 0; b < payoffs_.size(); ++b) {
    const Matrix& g = payoffs_[b];
    if (g.rows() != num_i_ || g.cols() != num_j_)
      throw ValidationError("payoff matrix " + std::to_string(b) + " has inconsistent shape");
    for (double v : g.data())
      if (!std::isfinite(v)) throw ValidationError("payoff entry is not finite");
    max_abs_ = std::max(max_abs_, g.max_abs());
  }
}

Matrix MatrixGameFamily::average(std::span<const double> weights) const {
  if (weights.size() != payoffs_.size())
    throw ValidationError("belief has " + std::to_string(weights.size()) +
                          " entries, family has " + std::to_string(payoffs_.size()) +
                          " type pairs");
  Matrix out(num_i_, num_j_);
  for (std::size_t b = 0; b < payoffs_.size(); ++b) {
    const double w = weights[b];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < num_i_; ++i)
      for (std::size_t j = 0; j < num_j_; ++j) out(i, j) += w * payoffs_[b](i, j);
  }
  return out;
}

double nonrevealing_value(const MatrixGameFamily& family, std::span<const double> pi) {
  return matrix_game_value(family.average(pi));
}

double nonrevealing_value(const MatrixGameFamily& family, const JointBelief& pi) {
  if (pi.num_k() != family.num_k() || pi.num_l() != family.num_l())
    throw ValidationError("belief dimensions do not match the family");
  return nonrevealing_value(family, pi.probs());
}

double u_k(const MatrixGameFamily& family, std::span<const double> p, const Matrix& q_given_k) {
  return nonrevealing_value(family, compose_k(p, q_given_k));
}

double u_l(const MatrixGameFamily& family, const Matrix& p_given_l, std::span<const double> q) {
  return nonrevealing_value(family, compose_l(q, p_given_l));
}

}  // namespace mzdual
