#include "mzdual/mz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mzdual {

namespace {

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

template <typename Op>
ValueTable pointwise(const ValueTable& a, const ValueTable& b, Op op) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
  return ValueTable(a.grid_ptr(), std::move(v));
}

void check_table(const ValueTable& w, const MZSystem& s) {
  if (!(w.grid() == *s.grid()))
    throw ValidationError("table does not live on the system's belief grid");
}

}  // namespace

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

ValueTable nonrevealing_table(const MatrixGameFamily& family, GridPtr joint_grid) {
  if (joint_grid->dimension() != family.num_k() * family.num_l())
    throw ValidationError("grid dimension does not match |K||L|");
  return tabulate(std::move(joint_grid),
                  [&](const std::vector<double>& pi) { return nonrevealing_value(family, pi); });
}

MZSystem::MZSystem(const MatrixGameFamily& family, std::size_t grid_m)
    : family_(family),
      grid_(std::make_shared<const SimplexGrid>(family.num_k() * family.num_l(), grid_m)),
      u_(nonrevealing_table(family, grid_)),
      k_plan_(grid_, shape(), FiberSide::kK),
      l_plan_(grid_, shape(), FiberSide::kL) {}

ValueTable MZSystem::constant(double c) const {
  return ValueTable(grid_, std::vector<double>(grid_->size(), c));
}

ValueTable MZSystem::cav_half(const ValueTable& w) const {
  check_table(w, *this);
  return cav_k(pointwise(u_, w, [](double a, double b) { return std::min(a, b); }), k_plan_);
}

ValueTable MZSystem::vex_half(const ValueTable& w) const {
  check_table(w, *this);
  return vex_l(pointwise(u_, w, [](double a, double b) { return std::max(a, b); }), l_plan_);
}

ValueTable MZSystem::step(const ValueTable& w) const { return vex_half(cav_half(w)); }

double MZSystem::cav_residual(const ValueTable& w) const {
  return sup_distance(w.values(), cav_half(w).values());
}

double MZSystem::vex_residual(const ValueTable& w) const {
  return sup_distance(w.values(), vex_half(w).values());
}

ValueTable mz_step(const ValueTable& w, const MatrixGameFamily& family) {
  return MZSystem(family, w.grid().resolution()).step(w);
}

MZSolution solve_mz(const MZSystem& system, const MZConfig& config) {
  if (!(config.tol > 0.0) || !(config.gap_tol > 0.0))
    throw ValidationError("MZ tolerances must be positive");
  const double bound = system.family().max_abs();

  auto run = [&](double start, std::size_t& iterations) {
    ValueTable w = system.constant(start);
    for (iterations = 1; iterations <= config.max_iter; ++iterations) {
      ValueTable next = system.step(w);
      const double move = sup_distance(next.values(), w.values());
      w = std::move(next);
      if (move < config.tol) return std::pair{w, true};
    }
    iterations = config.max_iter;
    return std::pair{w, false};
  };

  MZSolution s{system.constant(0.0), system.constant(bound), system.constant(-bound)};
  auto [upper, up_ok] = run(bound, s.upper_iterations);
  auto [lower, lo_ok] = run(-bound, s.lower_iterations);
  const double gap = sup_distance(upper.values(), lower.values());
  if (!up_ok || !lo_ok)
    throw MZConvergenceError("MZ iteration did not settle within " +
                                 std::to_string(config.max_iter) + " steps (bracket gap " +
                                 std::to_string(gap) + ")",
                             upper, lower, gap);
  if (gap > config.gap_tol)
    throw MZConvergenceError("MZ brackets settled " + std::to_string(gap) +
                                 " apart, above the gap tolerance",
                             upper, lower, gap);
  std::vector<double> mid(upper.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (upper[i] + lower[i]);
  s.w = ValueTable(system.grid(), std::move(mid));
  s.upper = std::move(upper);
  s.lower = std::move(lower);
  s.gap = gap;
  s.cav_residual = system.cav_residual(s.w);
  s.vex_residual = system.vex_residual(s.w);
  return s;
}

MZSolution solve_mz(const MatrixGameFamily& family, const MZConfig& config) {
  return solve_mz(MZSystem(family, config.grid_m), config);
}

namespace {

// Worst violation of W <= u (concave side) or W >= u (convex side) over the
// extreme points of every fiber of `plan`.
std::pair<double, std::string> extreme_check(const ValueTable& w, const MZSystem& s,
                                             const FiberPlan& plan, bool concave) {
  double worst = -std::numeric_limits<double>::infinity();
  std::string where;
  for (const auto& fiber : plan.fibers()) {
    std::vector<double> vals = plan.restrict(fiber, w.values());
    if (!concave)
      for (double& v : vals) v = -v;
    const ValueTable on_fiber(plan.marginal_grid_ptr(), vals);
    for (std::size_t i : extreme_points(on_fiber)) {
      const auto pi = plan.fiber_point(fiber, i);
      const double u = nonrevealing_value(s.family(), pi);
      const double gap = concave ? vals[i] - u : u + vals[i];
      if (gap > worst) {
        worst = gap;
        where = "pi = " + format_point(pi);
      }
    }
  }
  return {std::max(worst, 0.0), where};
}

std::string defect_witness(const FiberPlan& plan, const FiberDefect& d) {
  if (plan.fibers().empty()) return {};
  return "pi = " + format_point(plan.fiber_point(plan.fibers()[d.fiber], d.marginal_index));
}

}  // namespace

VerificationReport verify_mz(const ValueTable& w, const MZSystem& s,
                             const MZVerifyOptions& options) {
  check_table(w, s);
  VerificationReport r;
  const auto kd = fiber_defect(w, s.k_plan());
  r.add("k_concavity", kd.defect, options.shape_tol, defect_witness(s.k_plan(), kd));
  const auto ld = fiber_defect(w, s.l_plan());
  r.add("l_convexity", ld.defect, options.shape_tol, defect_witness(s.l_plan(), ld));
  r.add("cav_equation", s.cav_residual(w), options.equation_tol);
  r.add("vex_equation", s.vex_residual(w), options.equation_tol);
  auto [up, up_at] = extreme_check(w, s, s.k_plan(), true);
  r.add("extreme_upper", up, options.extreme_tol, up_at);
  auto [lo, lo_at] = extreme_check(w, s, s.l_plan(), false);
  r.add("extreme_lower", lo, options.extreme_tol, lo_at);
  return r;
}

VerificationReport verify_mz(const ValueTable& w, const MatrixGameFamily& family,
                             const MZVerifyOptions& options) {
  return verify_mz(w, MZSystem(family, w.grid().resolution()), options);
}

}  // namespace mzdual
