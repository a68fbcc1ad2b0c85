#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mzdual/belief.hpp"
#include "mzdual/lp.hpp"
#include "mzdual/matrix_game.hpp"

namespace mzdual {

// Stage weights theta_1..theta_n.
class Evaluation {
 public:
  explicit Evaluation(std::vector<double> weights);
  static Evaluation uniform(std::size_t n);

  std::size_t stages() const { return weights_.size(); }
  double operator[](std::size_t stage) const { return weights_[stage]; }
  std::span<const double> weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

inline constexpr double kTreeSizeCap = 1e6;

// Sequence-form description of one player in the perfect-monitoring
// repeated game: an information set is (own type, public history), a
// sequence extends one with an own action. Sequence 0 is the empty one.
struct SequenceTree {
  struct Infoset {
    std::size_t parent = 0;                 // sequence leading here
    std::vector<std::size_t> sequences;     // one per own action
  };
  std::size_t num_sequences = 1;
  std::vector<Infoset> infosets;  // parents precede children
  // child_infosets[s]: information sets whose parent is sequence s.
  std::vector<std::vector<std::size_t>> child_infosets;

  // Row 0 pins the empty sequence to 1; row 1 + h is
  // sum(children of h) - parent(h) = 0.
  Matrix constraints() const;
  std::vector<double> constraint_rhs() const;
  // Largest violation of the realization-plan equalities and of x >= 0.
  double plan_violation(std::span<const double> plan) const;
};

struct PayoffEntry {
  std::size_t row_sequence;
  std::size_t col_sequence;
  double value;
};

struct ExtensiveForm {
  std::size_t num_k = 0, num_l = 0, num_i = 0, num_j = 0, stages = 0;
  SequenceTree row;  // maximizer, private type k
  SequenceTree col;  // minimizer, private type l
  // Sparse bilinear payoff: value = sum x[row] * y[col] * entry.
  std::vector<PayoffEntry> payoff;

  // Index of the sequence (type, stage, history, action); stage is 0-based
  // and history is the base-(|I||J|) code of the stage-many past pairs.
  std::size_t row_sequence(std::size_t k, std::size_t stage, std::size_t history,
                           std::size_t i) const;
  std::size_t col_sequence(std::size_t l, std::size_t stage, std::size_t history,
                           std::size_t j) const;

  double expected_payoff(std::span<const double> x, std::span<const double> y) const;
};

// Throws SizeLimitError when |I|^n |J|^n |K| |L| exceeds the cap.
ExtensiveForm build_extensive(const MatrixGameFamily& family, const JointBelief& pi,
                              const Evaluation& theta);

struct RepeatedSolution {
  double value = 0.0;
  std::vector<double> row_plan;  // realization plan of the maximizer
  std::vector<double> col_plan;  // realization plan of the minimizer
  std::size_t lp_pivots = 0;
};

// Sequence-form LPs are massively degenerate (every best-response row has a
// zero right-hand side), so the default solve perturbs them.
inline lp::Options sequence_form_options() {
  lp::Options o;
  o.perturb = true;
  return o;
}

RepeatedSolution solve_extensive(const ExtensiveForm& form,
                                 const lp::Options& options = sequence_form_options());
RepeatedSolution value_n(const MatrixGameFamily& family, const JointBelief& pi,
                         const Evaluation& theta,
                         const lp::Options& options = sequence_form_options());

// [v_1, ..., v_{n_max}] with uniform weights.
std::vector<double> value_sequence(const MatrixGameFamily& family, const JointBelief& pi,
                                   std::size_t n_max,
                                   const lp::Options& options = sequence_form_options());

// Payoff of the best pure reply to a fixed plan of the other player.
double best_response_col(const ExtensiveForm& form, std::span<const double> row_plan);
double best_response_row(const ExtensiveForm& form, std::span<const double> col_plan);

}  // namespace mzdual
