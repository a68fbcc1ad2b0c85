#include "mzdual/repeated.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mzdual/errors.hpp"

namespace mzdual {

Evaluation::Evaluation(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ValidationError("evaluation needs at least one stage");
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("evaluation weight is negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("evaluation weights sum to " + std::to_string(total) + ", not 1");
}

Evaluation Evaluation::uniform(std::size_t n) {
  if (n == 0) throw ValidationError("evaluation needs at least one stage");
  return Evaluation(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Matrix SequenceTree::constraints() const {
  Matrix e(1 + infosets.size(), num_sequences);
  e(0, 0) = 1.0;
  for (std::size_t h = 0; h < infosets.size(); ++h) {
    e(1 + h, infosets[h].parent) -= 1.0;
    for (std::size_t s : infosets[h].sequences) e(1 + h, s) += 1.0;
  }
  return e;
}

std::vector<double> SequenceTree::constraint_rhs() const {
  std::vector<double> r(1 + infosets.size(), 0.0);
  r[0] = 1.0;
  return r;
}

double SequenceTree::plan_violation(std::span<const double> plan) const {
  if (plan.size() != num_sequences) return std::numeric_limits<double>::infinity();
  double worst = std::abs(plan[0] - 1.0);
  for (double v : plan) worst = std::max(worst, -v);
  for (const Infoset& h : infosets) {
    double s = -plan[h.parent];
    for (std::size_t q : h.sequences) s += plan[q];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

// Per-type infoset layout shared by both players: stage t holds (|I||J|)^t
// histories; offsets[t] is the number of histories in earlier stages.
struct Layout {
  std::size_t pairs, stages;
  std::vector<std::size_t> offsets;  // stages + 1 entries
  Layout(std::size_t pairs_, std::size_t stages_) : pairs(pairs_), stages(stages_) {
    offsets.assign(stages + 1, 0);
    for (std::size_t t = 0; t < stages; ++t) offsets[t + 1] = offsets[t] + ipow(pairs, t);
  }
  std::size_t per_type() const { return offsets[stages]; }
  std::size_t infoset(std::size_t type, std::size_t t, std::size_t h) const {
    return type * per_type() + offsets[t] + h;
  }
};

// own_action(code of last pair) extracts this player's action.
template <typename OwnAction>
SequenceTree build_tree(const Layout& lay, std::size_t types, std::size_t actions,
                        OwnAction own_action) {
  SequenceTree tree;
  const std::size_t per_type = lay.per_type();
  tree.num_sequences = 1 + types * per_type * actions;
  tree.infosets.resize(types * per_type);
  tree.child_infosets.assign(tree.num_sequences, {});
  for (std::size_t type = 0; type < types; ++type)
    for (std::size_t t = 0; t < lay.stages; ++t)
      for (std::size_t h = 0; h < ipow(lay.pairs, t); ++h) {
        const std::size_t id = lay.infoset(type, t, h);
        auto& info = tree.infosets[id];
        if (t == 0) {
          info.parent = 0;
        } else {
          const std::size_t prev = h / lay.pairs, last = h % lay.pairs;
          info.parent = 1 + lay.infoset(type, t - 1, prev) * actions + own_action(last);
        }
        tree.child_infosets[info.parent].push_back(id);
        for (std::size_t a = 0; a < actions; ++a) info.sequences.push_back(1 + id * actions + a);
      }
  return tree;
}

Layout layout_of(const ExtensiveForm& f) { return Layout(f.num_i * f.num_j, f.stages); }

}  // namespace

std::size_t ExtensiveForm::row_sequence(std::size_t k, std::size_t stage, std::size_t history,
                                        std::size_t i) const {
  return 1 + layout_of(*this).infoset(k, stage, history) * num_i + i;
}

std::size_t ExtensiveForm::col_sequence(std::size_t l, std::size_t stage, std::size_t history,
                                        std::size_t j) const {
  return 1 + layout_of(*this).infoset(l, stage, history) * num_j + j;
}

double ExtensiveForm::expected_payoff(std::span<const double> x, std::span<const double> y) const {
  double s = 0.0;
  for (const auto& e : payoff) s += x[e.row_sequence] * y[e.col_sequence] * e.value;
  return s;
}

ExtensiveForm build_extensive(const MatrixGameFamily& family, const JointBelief& pi,
                              const Evaluation& theta) {
  if (pi.num_k() != family.num_k() || pi.num_l() != family.num_l())
    throw ValidationError("belief dimensions do not match the family");
  const std::size_t n = theta.stages();
  const double size = std::pow(static_cast<double>(family.num_i()), n) *
                      std::pow(static_cast<double>(family.num_j()), n) *
                      static_cast<double>(family.num_k() * family.num_l());
  if (size > kTreeSizeCap)
    throw SizeLimitError("repeated game tree of size " + std::to_string(size) +
                         " exceeds the cap of 1e6");

  ExtensiveForm f;
  f.num_k = family.num_k();
  f.num_l = family.num_l();
  f.num_i = family.num_i();
  f.num_j = family.num_j();
  f.stages = n;
  const Layout lay(f.num_i * f.num_j, n);
  const std::size_t nj = f.num_j;
  f.row = build_tree(lay, f.num_k, f.num_i, [nj](std::size_t last) { return last / nj; });
  f.col = build_tree(lay, f.num_l, f.num_j, [nj](std::size_t last) { return last % nj; });

  for (std::size_t k = 0; k < f.num_k; ++k)
    for (std::size_t l = 0; l < f.num_l; ++l) {
      const double w = pi(k, l);
      if (w == 0.0) continue;
      const Matrix& g = family.payoff(k, l);
      for (std::size_t t = 0; t < n; ++t) {
        if (theta[t] == 0.0) continue;
        for (std::size_t h = 0; h < ipow(lay.pairs, t); ++h)
          for (std::size_t i = 0; i < f.num_i; ++i)
            for (std::size_t j = 0; j < f.num_j; ++j) {
              const double v = w * theta[t] * g(i, j);
              if (v != 0.0)
                f.payoff.push_back({f.row_sequence(k, t, h, i), f.col_sequence(l, t, h, j), v});
            }
      }
    }
  return f;
}

RepeatedSolution solve_extensive(const ExtensiveForm& form, const lp::Options& options) {
  const std::size_t n1 = form.row.num_sequences, n2 = form.col.num_sequences;
  const Matrix e = form.row.constraints();
  const Matrix fm = form.col.constraints();
  const std::size_t m1 = e.rows(), m2 = fm.rows();

  // max z_0  s.t.  F^T z - A^T x <= 0,  E x = e,  x >= 0,  z free.
  lp::Problem p;
  p.objective.assign(n1 + m2, 0.0);
  p.objective[n1] = 1.0;
  p.constraints = Matrix(n2 + m1, n1 + m2);
  for (const auto& entry : form.payoff)
    p.constraints(entry.col_sequence, entry.row_sequence) -= entry.value;
  for (std::size_t r = 0; r < m2; ++r)
    for (std::size_t s = 0; s < n2; ++s) p.constraints(s, n1 + r) = fm(r, s);
  for (std::size_t r = 0; r < m1; ++r)
    for (std::size_t q = 0; q < n1; ++q) p.constraints(n2 + r, q) = e(r, q);
  p.relations.assign(n2, lp::Relation::kLessEqual);
  p.relations.resize(n2 + m1, lp::Relation::kEqual);
  p.rhs.assign(n2 + m1, 0.0);
  p.rhs[n2] = 1.0;
  p.free_vars.assign(n1 + m2, false);
  for (std::size_t r = 0; r < m2; ++r) p.free_vars[n1 + r] = true;

  const lp::Solution s = lp::solve_or_throw(p, options);
  RepeatedSolution out;
  out.value = s.objective;
  out.row_plan.assign(s.primal.begin(), s.primal.begin() + static_cast<std::ptrdiff_t>(n1));
  out.col_plan.assign(s.dual.begin(), s.dual.begin() + static_cast<std::ptrdiff_t>(n2));
  out.lp_pivots = s.pivots;
  return out;
}

RepeatedSolution value_n(const MatrixGameFamily& family, const JointBelief& pi,
                         const Evaluation& theta, const lp::Options& options) {
  return solve_extensive(build_extensive(family, pi, theta), options);
}

std::vector<double> value_sequence(const MatrixGameFamily& family, const JointBelief& pi,
                                   std::size_t n_max, const lp::Options& options) {
  std::vector<double> v;
  for (std::size_t n = 1; n <= n_max; ++n)
    v.push_back(value_n(family, pi, Evaluation::uniform(n), options).value);
  return v;
}

namespace {

// Optimal pure reply on `tree` against linear sequence gains `g`; `better`
// picks the preferred of two totals.
template <typename Better>
double tree_best_reply(const SequenceTree& tree, const std::vector<double>& g, Better better) {
  std::vector<double> val(tree.infosets.size());
  auto subtree = [&](std::size_t s) {
    double v = g[s];
    for (std::size_t h : tree.child_infosets[s]) v += val[h];
    return v;
  };
  for (std::size_t h = tree.infosets.size(); h-- > 0;) {
    const auto& seqs = tree.infosets[h].sequences;
    double best = subtree(seqs[0]);
    for (std::size_t a = 1; a < seqs.size(); ++a) {
      const double v = subtree(seqs[a]);
      if (better(v, best)) best = v;
    }
    val[h] = best;
  }
  return subtree(0);
}

}  // namespace

double best_response_col(const ExtensiveForm& form, std::span<const double> row_plan) {
  std::vector<double> g(form.col.num_sequences, 0.0);
  for (const auto& e : form.payoff) g[e.col_sequence] += row_plan[e.row_sequence] * e.value;
  return tree_best_reply(form.col, g, [](double a, double b) { return a < b; });
}

double best_response_row(const ExtensiveForm& form, std::span<const double> col_plan) {
  std::vector<double> g(form.row.num_sequences, 0.0);
  for (const auto& e : form.payoff) g[e.row_sequence] += col_plan[e.col_sequence] * e.value;
  return tree_best_reply(form.row, g, [](double a, double b) { return a > b; });
}

}  // namespace mzdual
