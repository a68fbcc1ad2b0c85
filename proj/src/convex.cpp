#include "mzdual/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "mzdual/errors.hpp"
#include "mzdual/lp.hpp"

namespace mzdual {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

void check_dual_dimension(const ValueTable& t, std::span<const double> v) {
  if (v.size() != t.grid().dimension())
    throw ValidationError("dual vector has dimension " + std::to_string(v.size()) +
                          ", table lives on Delta(" + std::to_string(t.grid().dimension()) + ")");
  for (double x : v)
    if (!std::isfinite(x)) throw ValidationError("dual vector entry is not finite");
}

double grid_dot(const SimplexGrid& g, std::size_t i, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t c = 0; c < g.dimension(); ++c) s += g.coordinate(i, c) * v[c];
  return s;
}

// Upper concave hull of (i / m, values[i]) for a Delta(2) grid, evaluated at
// every node. Grid index i has first coordinate i / m.
std::vector<double> upper_hull_1d(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> hull;
  hull.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      // b is dropped when it lies on or below the chord from a to i.
      const double lhs = (values[b] - values[a]) * static_cast<double>(i - a);
      const double rhs = (values[i] - values[a]) * static_cast<double>(b - a);
      if (lhs <= rhs) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  std::vector<double> out(n);
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    const std::size_t a = hull[h], b = hull[h + 1];
    out[a] = values[a];
    for (std::size_t i = a + 1; i < b; ++i) {
      const double t = static_cast<double>(i - a) / static_cast<double>(b - a);
      out[i] = (1.0 - t) * values[a] + t * values[b];
    }
  }
  out[hull.back()] = values[hull.back()];
  return out;
}

// Concave envelope of `values` on `grid` at the requested nodes.
void envelope_at(const SimplexGrid& grid, std::span<const double> values,
                 std::span<const std::size_t> points, std::vector<double>& out) {
  if (grid.dimension() == 1) {
    for (std::size_t p : points) out[p] = values[p];
    return;
  }
  if (grid.dimension() == 2) {
    const auto hull = upper_hull_1d(values);
    for (std::size_t p : points) out[p] = hull[p];
    return;
  }
  for (std::size_t p : points) out[p] = cav_at(grid, values, p);
}

}  // namespace

ConjugateResult upper_conjugate(const ValueTable& phi, std::span<const double> zeta) {
  check_dual_dimension(phi, zeta);
  ConjugateResult r{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double v = phi[i] - grid_dot(phi.grid(), i, zeta);
    if (v > r.value) r = {v, i};
  }
  return r;
}

ConjugateResult lower_conjugate(const ValueTable& phi, std::span<const double> eta) {
  check_dual_dimension(phi, eta);
  ConjugateResult r{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double v = phi[i] + grid_dot(phi.grid(), i, eta);
    if (v < r.value) r = {v, i};
  }
  return r;
}

double cav_at(const SimplexGrid& grid, std::span<const double> values, std::size_t point,
              Certificate* certificate, std::size_t excluded) {
  const std::size_t d = grid.dimension();
  const std::size_t n = grid.size();
  if (values.size() != n) throw ValidationError("cav_at: values do not match the grid");
  if (d == 1) {
    if (excluded == point) return std::numeric_limits<double>::quiet_NaN();
    if (certificate) *certificate = {{point, 1.0}};
    return values[point];
  }
  std::vector<std::size_t> cols;
  cols.reserve(n);
  for (std::size_t r = 0; r < n; ++r)
    if (r != excluded) cols.push_back(r);

  // Rows 0..d-2 reproduce the first d-1 coordinates, row d-1 is sum lambda = 1.
  lp::Problem lp;
  lp.objective.resize(cols.size());
  lp.constraints = Matrix(d, cols.size());
  const double m = static_cast<double>(grid.resolution());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto a = grid.multi_index(cols[c]);
    lp.objective[c] = values[cols[c]];
    for (std::size_t row = 0; row + 1 < d; ++row) lp.constraints(row, c) = a[row] / m;
    lp.constraints(d - 1, c) = 1.0;
  }
  lp.relations.assign(d, lp::Relation::kEqual);
  lp.rhs.resize(d);
  const auto target = grid.multi_index(point);
  for (std::size_t row = 0; row + 1 < d; ++row) lp.rhs[row] = target[row] / m;
  lp.rhs[d - 1] = 1.0;

  const lp::Solution s = lp::solve(lp);
  if (s.status == lp::Status::kInfeasible) {
    if (excluded != kNone) return std::numeric_limits<double>::quiet_NaN();
    throw LpError("cav: envelope LP infeasible at a grid point");
  }
  if (!s.optimal()) throw LpError("cav: envelope LP " + std::string(lp::to_string(s.status)));
  if (certificate) {
    certificate->clear();
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (s.primal[c] > 0.0) certificate->emplace_back(cols[c], s.primal[c]);
  }
  return s.objective;
}

EnvelopeResult cav(const ValueTable& f) {
  std::vector<double> env(f.size());
  std::vector<Certificate> certs(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    env[i] = cav_at(f.grid(), f.values(), i, &certs[i]);
    // The envelope dominates f; clip LP rounding below f.
    env[i] = std::max(env[i], f[i]);
  }
  return {ValueTable(f.grid_ptr(), std::move(env)), std::move(certs)};
}

EnvelopeResult vex(const ValueTable& f) {
  std::vector<double> neg(f.values().begin(), f.values().end());
  for (double& v : neg) v = -v;
  EnvelopeResult r = cav(ValueTable(f.grid_ptr(), std::move(neg)));
  std::vector<double> env(r.envelope.values().begin(), r.envelope.values().end());
  for (double& v : env) v = -v;
  return {ValueTable(f.grid_ptr(), std::move(env)), std::move(r.certificates)};
}

double concavity_defect(const ValueTable& f) {
  std::vector<std::size_t> all(f.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> env(f.size());
  envelope_at(f.grid(), f.values(), all, env);
  double defect = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) defect = std::max(defect, env[i] - f[i]);
  return defect;
}

std::vector<double> superdifferential(const ValueTable& f, std::size_t point, double tol) {
  const SimplexGrid& g = f.grid();
  const std::size_t d = g.dimension();
  if (point >= f.size()) throw ValidationError("superdifferential: point out of range");
  if (d == 1) return {0.0};

  // Margin LP over (x_0..x_{d-2}, delta), x_{d-1} = 0 as gauge:
  //   max delta  s.t.  <x, p - p_r> + delta |p_r - p|_1 <= f(p) - f(p_r),  delta <= 1.
  // It has one row per grid node, so its dual (d rows) is solved instead and
  // (x, delta) read off the dual's multipliers.
  const std::size_t n = g.size();
  std::vector<std::size_t> others;
  for (std::size_t r = 0; r < n; ++r)
    if (r != point) others.push_back(r);
  const std::size_t cols = others.size() + 1;
  lp::Problem dual;
  dual.objective.resize(cols);
  dual.constraints = Matrix(d, cols);
  const auto p = g.multi_index(point);
  const double m = static_cast<double>(g.resolution());
  for (std::size_t c = 0; c < others.size(); ++c) {
    const auto pr = g.multi_index(others[c]);
    double l1 = 0.0;
    for (std::size_t k = 0; k < d; ++k) l1 += std::abs(pr[k] - p[k]) / m;
    for (std::size_t k = 0; k + 1 < d; ++k) dual.constraints(k, c) = (p[k] - pr[k]) / m;
    dual.constraints(d - 1, c) = l1;
    dual.objective[c] = -(f[point] - f[others[c]]);
  }
  dual.constraints(d - 1, cols - 1) = 1.0;
  dual.objective[cols - 1] = -1.0;
  dual.relations.assign(d, lp::Relation::kEqual);
  dual.rhs.assign(d, 0.0);
  dual.rhs[d - 1] = 1.0;
  const lp::Solution s = lp::solve_or_throw(dual);

  const double margin = -s.dual[d - 1];
  if (margin < -tol)
    throw NotConcaveError("superdifferential: table is not concave at grid point " +
                          std::to_string(point) + " (margin " + std::to_string(margin) + ")");
  std::vector<double> x(d, 0.0);
  for (std::size_t k = 0; k + 1 < d; ++k) x[k] = -s.dual[k];
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(d);
  for (double& v : x) v -= mean;
  return x;
}

std::vector<double> subdifferential(const ValueTable& f, std::size_t point, double tol) {
  std::vector<double> neg(f.values().begin(), f.values().end());
  for (double& v : neg) v = -v;
  try {
    auto x = superdifferential(ValueTable(f.grid_ptr(), std::move(neg)), point, tol);
    for (double& v : x) v = -v;
    return x;
  } catch (const NotConcaveError&) {
    throw NotConcaveError("subdifferential: table is not convex at grid point " +
                          std::to_string(point));
  }
}

std::vector<std::size_t> extreme_points(const ValueTable& f, double tol) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double hull = cav_at(f.grid(), f.values(), i, nullptr, i);
    if (std::isnan(hull) || hull < f[i] - tol) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FiberPlan

FiberPlan::FiberPlan(GridPtr joint, JointShape shape, FiberSide side)
    : joint_(std::move(joint)), shape_(shape), side_(side) {
  if (!joint_) throw ValidationError("fiber plan without a joint grid");
  const std::size_t nk = shape.num_k, nl = shape.num_l;
  if (joint_->dimension() != nk * nl)
    throw ValidationError("joint grid dimension " + std::to_string(joint_->dimension()) +
                          " does not match |K||L| = " + std::to_string(nk * nl));
  const std::size_t rows = side == FiberSide::kK ? nk : nl;
  const std::size_t cols = side == FiberSide::kK ? nl : nk;
  marginal_ = std::make_shared<SimplexGrid>(rows, joint_->resolution());

  auto entry = [&](std::span<const int> a, std::size_t r, std::size_t c) {
    return side == FiberSide::kK ? a[r * nl + c] : a[c * nl + r];
  };

  std::map<std::vector<int>, std::size_t> by_key;
  std::vector<int> marg(rows);
  std::vector<int> key(rows * cols);
  for (std::size_t j = 0; j < joint_->size(); ++j) {
    const auto a = joint_->multi_index(j);
    for (std::size_t r = 0; r < rows; ++r) {
      int mass = 0;
      for (std::size_t c = 0; c < cols; ++c) mass += entry(a, r, c);
      marg[r] = mass;
      int g = 0;
      for (std::size_t c = 0; c < cols; ++c) g = std::gcd(g, entry(a, r, c));
      for (std::size_t c = 0; c < cols; ++c)
        key[r * cols + c] = mass == 0 ? -1 : entry(a, r, c) / g;
    }
    auto [it, inserted] = by_key.try_emplace(key, fibers_.size());
    if (inserted) {
      Fiber fiber;
      fiber.conditionals = Matrix(rows, cols);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
          fiber.conditionals(r, c) =
              marg[r] == 0 ? 1.0 / static_cast<double>(cols)
                           : static_cast<double>(entry(a, r, c)) / marg[r];
      fibers_.push_back(std::move(fiber));
    }
    fibers_[it->second].members.emplace_back(j, marginal_->index_of(marg));
  }

  for (Fiber& fiber : fibers_) {
    fiber.stencils.resize(marginal_->size());
    fiber.aligned = true;
    for (std::size_t i = 0; i < marginal_->size(); ++i) {
      fiber.stencils[i] = kuhn_weights(*joint_, fiber_point(fiber, i));
      if (fiber.stencils[i].size() != 1) fiber.aligned = false;
    }
  }
}

std::vector<double> FiberPlan::fiber_point(const Fiber& fiber, std::size_t i) const {
  const std::size_t nk = shape_.num_k, nl = shape_.num_l;
  std::vector<double> pi(nk * nl);
  for (std::size_t k = 0; k < nk; ++k)
    for (std::size_t l = 0; l < nl; ++l) {
      if (side_ == FiberSide::kK)
        pi[k * nl + l] = marginal_->coordinate(i, k) * fiber.conditionals(k, l);
      else
        pi[k * nl + l] = marginal_->coordinate(i, l) * fiber.conditionals(l, k);
    }
  return pi;
}

std::vector<double> FiberPlan::restrict(const Fiber& fiber,
                                        std::span<const double> joint_values) const {
  std::vector<double> v(fiber.stencils.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double s = 0.0;
    for (const auto& [idx, w] : fiber.stencils[i]) s += w * joint_values[idx];
    v[i] = s;
  }
  return v;
}

namespace {

template <typename FiberValues>
ValueTable fiber_envelope(const FiberPlan& plan, bool concave, FiberValues values_of) {
  std::vector<double> out(plan.joint_grid().size());
  std::vector<double> env(plan.marginal_grid().size());
  std::vector<std::size_t> needed;
  for (const auto& fiber : plan.fibers()) {
    std::vector<double> vals = values_of(fiber);
    if (!concave)
      for (double& v : vals) v = -v;
    needed.clear();
    for (const auto& [j, i] : fiber.members) needed.push_back(i);
    envelope_at(plan.marginal_grid(), vals, needed, env);
    for (const auto& [j, i] : fiber.members) {
      const double e = std::max(env[i], vals[i]);
      out[j] = concave ? e : -e;
    }
  }
  return ValueTable(plan.joint_grid_ptr(), std::move(out));
}

void check_plan(const ValueTable& w, const FiberPlan& plan, FiberSide side) {
  if (!(w.grid() == plan.joint_grid()))
    throw ValidationError("table grid does not match the fiber plan");
  if (plan.side() != side) throw ValidationError("fiber plan is for the other player");
}

}  // namespace

ValueTable cav_k(const ValueTable& w, const FiberPlan& plan) {
  check_plan(w, plan, FiberSide::kK);
  return fiber_envelope(plan, true, [&](const FiberPlan::Fiber& f) {
    return plan.restrict(f, w.values());
  });
}

ValueTable vex_l(const ValueTable& w, const FiberPlan& plan) {
  check_plan(w, plan, FiberSide::kL);
  return fiber_envelope(plan, false, [&](const FiberPlan::Fiber& f) {
    return plan.restrict(f, w.values());
  });
}

ValueTable cav_k(const ValueTable& w, JointShape shape) {
  return cav_k(w, FiberPlan(w.grid_ptr(), shape, FiberSide::kK));
}

ValueTable vex_l(const ValueTable& w, JointShape shape) {
  return vex_l(w, FiberPlan(w.grid_ptr(), shape, FiberSide::kL));
}

ValueTable cav_k(const JointFunction& f, const FiberPlan& plan) {
  if (plan.side() != FiberSide::kK) throw ValidationError("fiber plan is for the other player");
  return fiber_envelope(plan, true, [&](const FiberPlan::Fiber& fiber) {
    std::vector<double> v(plan.marginal_grid().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(plan.fiber_point(fiber, i));
    return v;
  });
}

ValueTable vex_l(const JointFunction& f, const FiberPlan& plan) {
  if (plan.side() != FiberSide::kL) throw ValidationError("fiber plan is for the other player");
  return fiber_envelope(plan, false, [&](const FiberPlan::Fiber& fiber) {
    std::vector<double> v(plan.marginal_grid().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(plan.fiber_point(fiber, i));
    return v;
  });
}

FiberDefect fiber_defect(const ValueTable& w, const FiberPlan& plan) {
  if (!(w.grid() == plan.joint_grid()))
    throw ValidationError("table grid does not match the fiber plan");
  const bool concave = plan.side() == FiberSide::kK;
  FiberDefect worst;
  std::vector<std::size_t> all(plan.marginal_grid().size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> env(all.size());
  for (std::size_t fi = 0; fi < plan.fibers().size(); ++fi) {
    std::vector<double> vals = plan.restrict(plan.fibers()[fi], w.values());
    if (!concave)
      for (double& v : vals) v = -v;
    envelope_at(plan.marginal_grid(), vals, all, env);
    for (std::size_t i = 0; i < all.size(); ++i) {
      const double gap = env[i] - vals[i];
      if (gap > worst.defect) worst = {gap, fi, i};
    }
  }
  return worst;
}

}  // namespace mzdual
