#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mzdual/belief.hpp"
#include "mzdual/matrix.hpp"

namespace mzdual {

// Value and optimal mixed strategies of a zero-sum matrix game, row player
// maximizing.
struct GameSolution {
  double value = 0.0;
  std::vector<double> optimal_row;
  std::vector<double> optimal_col;
};

GameSolution solve_matrix_game(const Matrix& payoff);
double matrix_game_value(const Matrix& payoff);

// The payoff matrices G^{kl}: I x J -> R for every type pair.
class MatrixGameFamily {
 public:
  // `payoffs` is indexed k * |L| + l.
  MatrixGameFamily(std::size_t num_k, std::size_t num_l, std::vector<Matrix> payoffs);

  std::size_t num_k() const { return num_k_; }
  std::size_t num_l() const { return num_l_; }
  std::size_t num_i() const { return num_i_; }
  std::size_t num_j() const { return num_j_; }
  const Matrix& payoff(std::size_t k, std::size_t l) const {
    return payoffs_[k * num_l_ + l];
  }
  // max over all entries of all matrices of |G^{kl}(i, j)|.
  double max_abs() const { return max_abs_; }

  // sum_{k,l} weights(k,l) G^{kl}; weights has |K||L| entries.
  Matrix average(std::span<const double> weights) const;

 private:
  std::size_t num_k_, num_l_, num_i_, num_j_;
  std::vector<Matrix> payoffs_;
  double max_abs_ = 0.0;
};

// u(pi): value of the pi-averaged one-shot game.
double nonrevealing_value(const MatrixGameFamily& family, const JointBelief& pi);
double nonrevealing_value(const MatrixGameFamily& family, std::span<const double> pi);

// u_K(p, Q) = u(p (x) Q) and u_L(P, q) = u(q (x) P).
double u_k(const MatrixGameFamily& family, std::span<const double> p, const Matrix& q_given_k);
double u_l(const MatrixGameFamily& family, const Matrix& p_given_l, std::span<const double> q);

}  // namespace mzdual
