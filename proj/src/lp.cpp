#include "mzdual/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mzdual/errors.hpp"

namespace mzdual::lp {

std::string_view to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kPivotLimit: return "pivot-limit";
  }
  return "unknown";
}

namespace {

enum class ColumnKind { kStructural, kSlack, kArtificial };

// Tableau in canonical form: each row i expresses basic variable basis[i];
// the last column holds the basic values. reduced[j] = c_j - c_B B^-1 A_j.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), width_(cols + 1), t_(rows * width_, 0.0),
        basis_(rows, 0), reduced_(cols, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }
  double& rhs(std::size_t r) { return t_[r * width_ + cols_]; }
  double rhs(std::size_t r) const { return t_[r * width_ + cols_]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::vector<double>& reduced() { return reduced_; }

  // Remember the current tableau (identity basis) as the source for
  // reinversion.
  void snapshot() { orig_ = t_; inert_.assign(rows_, false); }
  // Rows left with a zero-level artificial that cannot be pivoted out.
  void mark_inert(std::size_t r) {
    inert_[r] = true;
    for (std::size_t c = 0; c < width_; ++c) at(r, c) = 0.0;
  }
  bool inert(std::size_t r) const { return inert_[r]; }
  void set_snapshot_rhs(std::size_t r, double v) { orig_[r * width_ + cols_] = v; }

  // Rebuilds B^-1 [A | b] from the snapshot for the current basis, which
  // removes the rounding accumulated by elimination pivots. Returns false
  // (leaving the tableau untouched) when the basis matrix looks singular.
  bool reinvert(const std::vector<bool>& keep_inert_column);

  void set_costs(const std::vector<double>& cost) {
    for (std::size_t j = 0; j < cols_; ++j) {
      double v = cost[j];
      for (std::size_t i = 0; i < rows_; ++i) {
        const double cb = cost[basis_[i]];
        if (cb != 0.0) v -= cb * at(i, j);
      }
      reduced_[j] = v;
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    double* prow = &t_[pr * width_];
    const double inv = 1.0 / prow[pc];
    for (std::size_t c = 0; c < width_; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      double* row = &t_[r * width_];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
    const double f = reduced_[pc];
    if (f != 0.0) {
      for (std::size_t c = 0; c < cols_; ++c) reduced_[c] -= f * prow[c];
      reduced_[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

 private:
  std::size_t rows_, cols_, width_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  std::vector<double> reduced_;
  std::vector<double> orig_;
  std::vector<bool> inert_;
};

bool Tableau::reinvert(const std::vector<bool>& keep_inert_column) {
  const std::size_t m = rows_;
  // LU with partial pivoting of B (columns of the snapshot at the basis).
  std::vector<double> lu(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) lu[i * m + k] = orig_[i * width_ + basis_[k]];
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t p = c;
    for (std::size_t i = c + 1; i < m; ++i)
      if (std::abs(lu[i * m + c]) > std::abs(lu[p * m + c])) p = i;
    if (std::abs(lu[p * m + c]) < 1e-11) return false;
    if (p != c) {
      for (std::size_t k = 0; k < m; ++k) std::swap(lu[c * m + k], lu[p * m + k]);
      std::swap(perm[c], perm[p]);
    }
    const double inv = 1.0 / lu[c * m + c];
    for (std::size_t i = c + 1; i < m; ++i) {
      const double f = lu[i * m + c] * inv;
      if (f == 0.0) continue;
      lu[i * m + c] = f;
      for (std::size_t k = c + 1; k < m; ++k) lu[i * m + k] -= f * lu[c * m + k];
    }
  }
  // Solve B X = orig for all columns at once, row-block by row-block.
  std::vector<double> x(m * width_);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(&orig_[perm[i] * width_], width_, &x[i * width_]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < i; ++k) {
      const double f = lu[i * m + k];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) x[i * width_ + c] -= f * x[k * width_ + c];
    }
  for (std::size_t i = m; i-- > 0;) {
    for (std::size_t k = i + 1; k < m; ++k) {
      const double f = lu[i * m + k];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width_; ++c) x[i * width_ + c] -= f * x[k * width_ + c];
    }
    const double inv = 1.0 / lu[i * m + i];
    for (std::size_t c = 0; c < width_; ++c) x[i * width_ + c] *= inv;
  }
  // Row k of X expresses basic variable basis_[k].
  t_.swap(x);
  for (std::size_t r = 0; r < m; ++r) {
    if (inert_[r]) {
      for (std::size_t c = 0; c < width_; ++c)
        if (c == cols_ || !keep_inert_column[c]) at(r, c) = 0.0;
    }
    at(r, basis_[r]) = 1.0;
  }
  return true;
}

enum class LoopResult { kOptimal, kUnbounded, kPivotLimit };

LoopResult run_simplex(Tableau& tab, const std::vector<double>& cost,
                       const std::vector<bool>& may_enter, const std::vector<bool>& artificial,
                       const Options& opt, std::size_t& pivots) {
  const double tol = opt.pivot_tol;
  const std::size_t refresh_every = std::max<std::size_t>(100, tab.rows());
  std::size_t since_refresh = 0;
  std::size_t degenerate_run = 0;
  constexpr std::size_t kDegenerateSwitch = 50;
  auto& reduced = tab.reduced();
  auto& basis = tab.basis();
  while (true) {
    if (pivots >= opt.max_pivots) return LoopResult::kPivotLimit;
    if (since_refresh >= refresh_every) {
      if (tab.reinvert(artificial)) tab.set_costs(cost);
      since_refresh = 0;
    }
    const bool bland =
        opt.rule == PivotRule::kBland || degenerate_run >= kDegenerateSwitch;
    std::size_t enter = tab.cols();
    double best = tol;
    for (std::size_t j = 0; j < tab.cols(); ++j) {
      if (!may_enter[j] || reduced[j] <= tol) continue;
      if (bland) {
        enter = j;
        break;
      }
      if (reduced[j] > best) {
        best = reduced[j];
        enter = j;
      }
    }
    if (enter == tab.cols()) return LoopResult::kOptimal;

    // Bland: exact minimum ratio, ties to the smallest basic index (the
    // anti-cycling argument needs true ties). Dantzig: two-pass Harris test,
    // bounding the step with a small feasibility relaxation and then taking
    // the largest pivot element within the bound.
    constexpr double kHarris = 1e-9;
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      const double a = tab.at(i, enter);
      if (a <= opt.element_tol) continue;
      const double rhs = std::max(tab.rhs(i), 0.0);
      bound = std::min(bound, bland ? rhs / a : (rhs + kHarris) / a);
    }
    std::size_t leave = tab.rows();
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      const double a = tab.at(i, enter);
      if (a <= opt.element_tol) continue;
      const double ratio = std::max(tab.rhs(i), 0.0) / a;
      if (ratio > (bland ? bound + 1e-12 : bound)) continue;
      bool take = leave == tab.rows();
      if (!take) take = bland ? basis[i] < basis[leave] : a > tab.at(leave, enter);
      if (take) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave == tab.rows()) return LoopResult::kUnbounded;
    degenerate_run = best_ratio <= 1e-12 ? degenerate_run + 1 : 0;
    tab.pivot(leave, enter);
    ++pivots;
    ++since_refresh;
  }
}

// Runs the loop, then refreshes the tableau and confirms optimality on the
// clean copy (re-entering the loop if rounding had hidden a pivot).
LoopResult run_to_optimum(Tableau& tab, const std::vector<double>& cost,
                          const std::vector<bool>& may_enter, const std::vector<bool>& artificial,
                          const Options& opt, std::size_t& pivots) {
  for (int round = 0; round < 3; ++round) {
    const std::size_t before = pivots;
    const LoopResult r = run_simplex(tab, cost, may_enter, artificial, opt, pivots);
    if (r != LoopResult::kOptimal) return r;
    if (round > 0 && pivots == before) return r;
    if (!tab.reinvert(artificial)) return r;
    tab.set_costs(cost);
  }
  return run_simplex(tab, cost, may_enter, artificial, opt, pivots);
}

// Dual simplex pivots until every basic value is >= -tol; the basis must be
// dual feasible on entry. Returns false if a row admits no entering column.
bool dual_cleanup(Tableau& tab, const std::vector<bool>& may_enter, const Options& opt,
                  std::size_t& pivots) {
  constexpr double kFeasTol = 1e-10;
  auto& reduced = tab.reduced();
  while (pivots < opt.max_pivots) {
    std::size_t leave = tab.rows();
    double worst = -kFeasTol;
    for (std::size_t i = 0; i < tab.rows(); ++i)
      if (tab.rhs(i) < worst) {
        worst = tab.rhs(i);
        leave = i;
      }
    if (leave == tab.rows()) return true;
    std::size_t enter = tab.cols();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < tab.cols(); ++j) {
      const double a = tab.at(leave, j);
      if (!may_enter[j] || a >= -opt.element_tol) continue;
      const double ratio = std::min(reduced[j], 0.0) / a;
      if (ratio < best) {
        best = ratio;
        enter = j;
      }
    }
    if (enter == tab.cols()) return false;
    tab.pivot(leave, enter);
    ++pivots;
  }
  return false;
}

}  // namespace

Solution solve(const Problem& problem, const Options& opt) {
  const std::size_t m = problem.constraints.rows();
  const std::size_t n = problem.objective.size();
  if (problem.constraints.cols() != n && m > 0)
    throw ValidationError("lp: constraint width does not match objective");
  if (problem.relations.size() != m || problem.rhs.size() != m)
    throw ValidationError("lp: relations/rhs size mismatch");
  if (!problem.free_vars.empty() && problem.free_vars.size() != n)
    throw ValidationError("lp: free_vars size mismatch");
  auto is_free = [&](std::size_t j) {
    return !problem.free_vars.empty() && problem.free_vars[j];
  };

  // Column layout: structural (free variables get a negated twin), then one
  // slack/surplus per inequality row, then one artificial per >=/= row.
  std::vector<std::size_t> pos_col(n), neg_col(n, SIZE_MAX);
  std::size_t ncols = 0;
  for (std::size_t j = 0; j < n; ++j) {
    pos_col[j] = ncols++;
    if (is_free(j)) neg_col[j] = ncols++;
  }

  std::vector<double> sign(m, 1.0);
  std::vector<Relation> rel(problem.relations);
  for (std::size_t i = 0; i < m; ++i) {
    if (problem.rhs[i] < 0.0) {
      sign[i] = -1.0;
      if (rel[i] == Relation::kLessEqual) rel[i] = Relation::kGreaterEqual;
      else if (rel[i] == Relation::kGreaterEqual) rel[i] = Relation::kLessEqual;
    }
  }
  std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX);
  for (std::size_t i = 0; i < m; ++i)
    if (rel[i] != Relation::kEqual) slack_col[i] = ncols++;
  for (std::size_t i = 0; i < m; ++i)
    if (rel[i] != Relation::kLessEqual) art_col[i] = ncols++;

  std::vector<ColumnKind> kind(ncols, ColumnKind::kStructural);
  for (std::size_t i = 0; i < m; ++i) {
    if (slack_col[i] != SIZE_MAX) kind[slack_col[i]] = ColumnKind::kSlack;
    if (art_col[i] != SIZE_MAX) kind[art_col[i]] = ColumnKind::kArtificial;
  }

  Tableau tab(m, ncols);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = sign[i] * problem.constraints(i, j);
      tab.at(i, pos_col[j]) = a;
      if (neg_col[j] != SIZE_MAX) tab.at(i, neg_col[j]) = -a;
    }
    tab.rhs(i) = sign[i] * problem.rhs[i];
    if (rel[i] == Relation::kLessEqual) {
      tab.at(i, slack_col[i]) = 1.0;
      tab.basis()[i] = slack_col[i];
    } else {
      if (rel[i] == Relation::kGreaterEqual) tab.at(i, slack_col[i]) = -1.0;
      tab.at(i, art_col[i]) = 1.0;
      tab.basis()[i] = art_col[i];
    }
  }

  std::vector<double> perturbation(m, 0.0);
  if (opt.perturb)
    for (std::size_t i = 0; i < m; ++i)
      if (rel[i] == Relation::kLessEqual) {
        // Deterministic, row-distinct amounts in [1e-7, 2e-7] scaled by |b|.
        const double h = static_cast<double>((i * 7919 + 13) % 1009) / 1009.0;
        perturbation[i] = 1e-7 * (1.0 + h) * (1.0 + std::abs(tab.rhs(i)));
        tab.rhs(i) += perturbation[i];
      }
  tab.snapshot();
  std::vector<bool> artificial(ncols, false);
  for (std::size_t j = 0; j < ncols; ++j) artificial[j] = kind[j] == ColumnKind::kArtificial;

  Solution sol;
  double rhs_scale = 1.0;
  for (double b : problem.rhs) rhs_scale = std::max(rhs_scale, std::abs(b));

  // Phase 1: drive artificials to zero.
  bool has_artificial = false;
  for (std::size_t i = 0; i < m; ++i) has_artificial |= art_col[i] != SIZE_MAX;
  if (has_artificial) {
    std::vector<double> cost(ncols, 0.0);
    for (std::size_t j = 0; j < ncols; ++j)
      if (kind[j] == ColumnKind::kArtificial) cost[j] = -1.0;
    tab.set_costs(cost);
    std::vector<bool> may_enter(ncols, true);
    const auto r = run_to_optimum(tab, cost, may_enter, artificial, opt, sol.pivots);
    if (r == LoopResult::kPivotLimit) {
      sol.status = Status::kPivotLimit;
      return sol;
    }
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (kind[tab.basis()[i]] == ColumnKind::kArtificial)
        infeasibility += std::max(tab.rhs(i), 0.0);
    if (infeasibility > 1e-9 * rhs_scale) {
      sol.status = Status::kInfeasible;
      return sol;
    }
    // Pivot zero-level artificials out of the basis where possible; rows
    // where that is impossible are redundant and stay inert.
    for (std::size_t i = 0; i < m; ++i) {
      if (kind[tab.basis()[i]] != ColumnKind::kArtificial) continue;
      std::size_t best = ncols;
      double best_abs = opt.pivot_tol;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (kind[j] == ColumnKind::kArtificial) continue;
        if (std::abs(tab.at(i, j)) > best_abs) {
          best_abs = std::abs(tab.at(i, j));
          best = j;
        }
      }
      if (best != ncols) {
        tab.rhs(i) = 0.0;
        tab.pivot(i, best);
        ++sol.pivots;
      } else {
        // Keep the artificial columns so duals can still be read off.
        std::vector<double> keep(ncols);
        for (std::size_t j = 0; j < ncols; ++j) keep[j] = tab.at(i, j);
        tab.mark_inert(i);
        for (std::size_t j = 0; j < ncols; ++j)
          if (artificial[j]) tab.at(i, j) = keep[j];
      }
    }
  }

  // Phase 2.
  std::vector<double> cost(ncols, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    cost[pos_col[j]] = problem.objective[j];
    if (neg_col[j] != SIZE_MAX) cost[neg_col[j]] = -problem.objective[j];
  }
  tab.set_costs(cost);
  std::vector<bool> may_enter(ncols, true);
  for (std::size_t j = 0; j < ncols; ++j)
    if (kind[j] == ColumnKind::kArtificial) may_enter[j] = false;
  const auto r = run_to_optimum(tab, cost, may_enter, artificial, opt, sol.pivots);
  if (r == LoopResult::kPivotLimit) {
    sol.status = Status::kPivotLimit;
    return sol;
  }
  if (r == LoopResult::kUnbounded) {
    sol.status = Status::kUnbounded;
    return sol;
  }
  if (opt.perturb) {
    for (std::size_t i = 0; i < m; ++i)
      if (perturbation[i] != 0.0) tab.set_snapshot_rhs(i, sign[i] * problem.rhs[i]);
    if (!tab.reinvert(artificial)) {
      sol.status = Status::kPivotLimit;
      return sol;
    }
    tab.set_costs(cost);
    if (!dual_cleanup(tab, may_enter, opt, sol.pivots)) {
      sol.status = Status::kPivotLimit;
      return sol;
    }
    const auto again = run_to_optimum(tab, cost, may_enter, artificial, opt, sol.pivots);
    if (again != LoopResult::kOptimal) {
      sol.status = again == LoopResult::kUnbounded ? Status::kUnbounded : Status::kPivotLimit;
      return sol;
    }
  }

  std::vector<double> value(ncols, 0.0);
  for (std::size_t i = 0; i < m; ++i) value[tab.basis()[i]] = tab.rhs(i);
  sol.primal.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double v = value[pos_col[j]];
    if (neg_col[j] != SIZE_MAX) v -= value[neg_col[j]];
    sol.primal[j] = is_free(j) ? v : std::max(v, 0.0);
  }
  // y = c_B B^-1; the column that started as e_i now holds B^-1 e_i and has
  // zero phase-2 cost, so its reduced cost is -y_i.
  sol.dual.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t col =
        rel[i] == Relation::kLessEqual ? slack_col[i] : art_col[i];
    sol.dual[i] = -sign[i] * tab.reduced()[col];
  }

  sol.objective = dot(problem.objective, sol.primal);
  double resid = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double slack = problem.rhs[i] - dot(problem.constraints.row(i), sol.primal);
    resid = std::max(resid, std::abs(sol.dual[i] * slack));
  }
  for (std::size_t j = 0; j < n; ++j) {
    double rc = problem.objective[j];
    for (std::size_t i = 0; i < m; ++i) rc -= problem.constraints(i, j) * sol.dual[i];
    resid = std::max(resid, is_free(j) ? std::abs(rc) : std::abs(sol.primal[j] * rc));
  }
  sol.slackness_residual = resid;
  sol.status = Status::kOptimal;
  return sol;
}

Solution solve_or_throw(const Problem& problem, const Options& options) {
  Solution s = solve(problem, options);
  if (!s.optimal())
    throw LpError("lp solve failed: " + std::string(to_string(s.status)));
  return s;
}

}  // namespace mzdual::lp
