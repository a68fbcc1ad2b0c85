#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "mzdual/matrix.hpp"

// Dense tableau simplex. Every LP in this library is tiny (a few thousand
// columns at most), so determinism matters more than speed: pivoting follows
// Bland's rule unless the caller opts into Dantzig's rule, which falls back to
// Bland after a run of degenerate pivots.
namespace mzdual::lp {

enum class Relation { kLessEqual, kEqual, kGreaterEqual };

enum class Status { kOptimal, kInfeasible, kUnbounded, kPivotLimit };

enum class PivotRule { kBland, kDantzig };

std::string_view to_string(Status status);

// maximize  objective . x
// s.t.      constraints.row(i) . x  (relations[i])  rhs[i]
//           x[j] >= 0 unless free_vars[j]
struct Problem {
  std::vector<double> objective;
  Matrix constraints;
  std::vector<Relation> relations;
  std::vector<double> rhs;
  std::vector<bool> free_vars;  // empty means every variable is nonnegative
};

struct Options {
  double pivot_tol = 1e-9;     // reduced-cost optimality tolerance
  double element_tol = 1e-7;   // smallest admissible pivot element
  // Loosen every <= row by a tiny deterministic amount while pivoting, then
  // restore the data and repair with dual simplex pivots. Breaks the
  // stalling of highly degenerate problems.
  bool perturb = false;
  PivotRule rule = PivotRule::kBland;
  std::size_t max_pivots = 2'000'000;
};

struct Solution {
  Status status = Status::kInfeasible;
  double objective = 0.0;
  std::vector<double> primal;
  // Row multipliers of the maximization: >= 0 on <= rows, <= 0 on >= rows,
  // free on equality rows. objective = rhs . dual at optimality.
  std::vector<double> dual;
  std::size_t pivots = 0;
  // max |y_i * slack_i|, |x_j * reduced_cost_j| and |reduced cost| of free
  // variables, evaluated on the original (unscaled) problem.
  double slackness_residual = 0.0;

  bool optimal() const { return status == Status::kOptimal; }
};

Solution solve(const Problem& problem, const Options& options = {});

// Same as solve() but throws LpError unless the status is optimal.
Solution solve_or_throw(const Problem& problem, const Options& options = {});

}  // namespace mzdual::lp
