#include "mzdual/hji.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

#include "mzdual/errors.hpp"
#include "mzdual/mz.hpp"

namespace mzdual {

StateLattice::StateLattice(std::vector<double> lower, std::vector<std::size_t> counts,
                           double dx)
    : lower_(std::move(lower)), counts_(std::move(counts)), dx_(dx) {
  if (lower_.size() != counts_.size() || counts_.empty())
    throw ValidationError("state lattice needs one count per dimension");
  if (!(dx_ > 0.0) || !std::isfinite(dx_)) throw ValidationError("dx must be positive");
  strides_.assign(counts_.size(), 1);
  size_ = 1;
  for (std::size_t d = counts_.size(); d-- > 0;) {
    if (counts_[d] == 0) throw ValidationError("empty lattice dimension");
    strides_[d] = size_;
    size_ *= counts_[d];
  }
}

double StateLattice::coordinate(std::size_t node, std::size_t d) const {
  return lower_[d] + static_cast<double>(component(node, d)) * dx_;
}

Point StateLattice::point(std::size_t node) const {
  Point x(dimension());
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = coordinate(node, d);
  return x;
}

std::optional<std::size_t> StateLattice::neighbor(std::size_t node, std::size_t d,
                                                  int dir) const {
  const std::size_t c = component(node, d);
  if (dir > 0) {
    if (c + 1 >= counts_[d]) return std::nullopt;
    return node + strides_[d];
  }
  if (c == 0) return std::nullopt;
  return node - strides_[d];
}

bool StateLattice::interior(std::size_t node, std::size_t depth) const {
  for (std::size_t d = 0; d < dimension(); ++d) {
    const std::size_t c = component(node, d);
    if (c < depth || c + depth >= counts_[d]) return false;
  }
  return true;
}

std::size_t StateLattice::index_of(std::span<const double> x) const {
  if (x.size() != dimension()) throw DomainError("state has the wrong dimension");
  std::size_t node = 0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double r = (x[d] - lower_[d]) / dx_;
    const double c = std::round(r);
    if (std::abs(r - c) > 1e-9 || c < 0.0 || c >= static_cast<double>(counts_[d]))
      throw DomainError("state " + format_point(x) + " is not a lattice node");
    node += static_cast<std::size_t>(c) * strides_[d];
  }
  return node;
}

StateLattice state_box(const MayerSpec& spec, double dx) {
  if (!(dx > 0.0) || !std::isfinite(dx)) throw ValidationError("dx must be positive");
  double zmax = 0.0;
  for (double v : spec.z) zmax = std::max(zmax, std::abs(v));
  const double radius = zmax + spec.bounds.bound;
  const auto half = static_cast<std::size_t>(std::max(1.0, std::ceil(radius / dx - 1e-9)));
  std::vector<double> lower(spec.z.size());
  for (std::size_t d = 0; d < lower.size(); ++d)
    lower[d] = spec.z[d] - static_cast<double>(half) * dx;
  return StateLattice(std::move(lower), std::vector<std::size_t>(spec.z.size(), 2 * half + 1),
                      dx);
}

ValueGrid::ValueGrid(std::vector<double> times, StateLattice lattice, GridPtr beliefs,
                     JointShape shape, std::vector<double> diffusion)
    : times_(std::move(times)),
      lattice_(std::move(lattice)),
      beliefs_(std::move(beliefs)),
      shape_(shape),
      diffusion_(std::move(diffusion)) {
  if (times_.empty()) throw ValidationError("value grid needs at least one time");
  if (!beliefs_ || beliefs_->dimension() != shape_.num_k * shape_.num_l)
    throw ValidationError("belief grid dimension must be |K||L|");
  if (diffusion_.size() != lattice_.dimension())
    throw ValidationError("one diffusion coefficient per state dimension");
  values_.assign(times_.size() * lattice_.size() * beliefs_->size(), 0.0);
}

double ValueGrid::value(std::size_t i, std::span<const double> x,
                        std::span<const double> pi) const {
  const std::size_t s = lattice_.index_of(x);
  const auto t = table(i, s);
  double v = 0.0;
  for (const auto& [idx, w] : kuhn_weights(*beliefs_, pi)) v += w * t[idx];
  return v;
}

namespace {

// Runs body(begin, end) over [0, n) split into contiguous chunks.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex mu;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// One-sided differences of `values(s')` at node s; at a face the missing
// side copies the present one.
template <typename Values>
void differences(const StateLattice& lat, std::size_t s, Values values,
                 std::vector<double>& dm, std::vector<double>& dp) {
  const double v = values(s);
  for (std::size_t d = 0; d < lat.dimension(); ++d) {
    const auto up = lat.neighbor(s, d, +1), dn = lat.neighbor(s, d, -1);
    const double plus = up ? (values(*up) - v) / lat.dx() : 0.0;
    const double minus = dn ? (v - values(*dn)) / lat.dx() : 0.0;
    dp[d] = up ? plus : (dn ? minus : 0.0);
    dm[d] = dn ? minus : (up ? plus : 0.0);
  }
}

double lax_friedrichs(const MayerSpec& spec, double t, std::span<const double> x,
                      std::span<const double> dm, std::span<const double> dp,
                      std::span<const double> a, double isaacs_tol) {
  std::vector<double> center(dm.size());
  double diffusion = 0.0;
  for (std::size_t d = 0; d < dm.size(); ++d) {
    center[d] = 0.5 * (dm[d] + dp[d]);
    diffusion += 0.5 * a[d] * (dp[d] - dm[d]);
  }
  return isaacs_hamiltonian(spec, t, x, center, isaacs_tol) + diffusion;
}

void project(ValueGrid& grid, std::size_t i, std::size_t s, const FiberPlan* k_plan,
             const FiberPlan* l_plan, SplittingOrder order) {
  if (!k_plan && !l_plan) return;
  auto row = grid.table(i, s);
  ValueTable w(grid.beliefs_ptr(), std::vector<double>(row.begin(), row.end()));
  auto apply_k = [&] {
    if (k_plan) w = cav_k(w, *k_plan);
  };
  auto apply_l = [&] {
    if (l_plan) w = vex_l(w, *l_plan);
  };
  if (order == SplittingOrder::kCavThenVex) {
    apply_k();
    apply_l();
  } else {
    apply_l();
    apply_k();
  }
  std::copy(w.values().begin(), w.values().end(), row.begin());
}

}  // namespace

std::vector<double> artificial_diffusion(const MayerSpec& spec, const StateLattice& lattice,
                                         std::uint64_t seed) {
  std::vector<std::size_t> nodes;
  constexpr std::size_t kMaxNodes = 4096;
  if (lattice.size() <= kMaxNodes) {
    nodes.resize(lattice.size());
    for (std::size_t s = 0; s < nodes.size(); ++s) nodes[s] = s;
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, lattice.size() - 1);
    for (std::size_t r = 0; r < kMaxNodes; ++r) nodes.push_back(pick(rng));
  }
  std::vector<double> a(spec.state_dim, 0.0), f(spec.state_dim);
  for (double t : {spec.t0, 0.5 * (spec.t0 + 1.0), 1.0})
    for (std::size_t s : nodes) {
      const Point x = lattice.point(s);
      for (const auto& u : spec.controls_u)
        for (const auto& v : spec.controls_v) {
          spec.dynamics(t, x, u, v, f);
          for (std::size_t d = 0; d < f.size(); ++d) a[d] = std::max(a[d], std::abs(f[d]));
        }
    }
  return a;
}

double numerical_hamiltonian(const MayerSpec& spec, double t, std::span<const double> x,
                             std::span<const double> dminus, std::span<const double> dplus,
                             std::span<const double> diffusion) {
  return lax_friedrichs(spec, t, x, dminus, dplus, diffusion,
                        std::numeric_limits<double>::infinity());
}

void hj_step(const MayerSpec& spec, ValueGrid& grid, std::size_t i, const FiberPlan* k_plan,
             const FiberPlan* l_plan, SplittingOrder order, double isaacs_tol,
             std::size_t threads) {
  if (i + 1 >= grid.num_times()) throw ValidationError("no later slice to step from");
  const StateLattice& lat = grid.lattice();
  const std::size_t nb = grid.beliefs().size();
  const double t = grid.times()[i + 1], dt = grid.times()[i + 1] - grid.times()[i];
  const auto a = grid.diffusion();
  parallel_for(lat.size(), threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> dm(lat.dimension()), dp(lat.dimension());
    for (std::size_t s = lo; s < hi; ++s) {
      const Point x = lat.point(s);
      for (std::size_t b = 0; b < nb; ++b) {
        differences(lat, s, [&](std::size_t n) { return grid.at(i + 1, n, b); }, dm, dp);
        grid.at(i, s, b) =
            grid.at(i + 1, s, b) + dt * lax_friedrichs(spec, t, x, dm, dp, a, isaacs_tol);
      }
      project(grid, i, s, k_plan, l_plan, order);
    }
  });
}

ValueGrid solve_value(const MayerSpec& spec, const HjConfig& config) {
  validate(spec);
  if (config.belief_m == 0) throw ValidationError("belief grid resolution must be positive");
  check_declared_bounds(spec, config.bound_samples, config.seed);
  StateLattice lattice = state_box(spec, config.dx);
  const std::size_t steps = step_count(spec.t0, config.dt);
  const std::size_t nkl = spec.num_k * spec.num_l;
  const double beliefs = static_cast<double>(SimplexGrid::count(nkl, config.belief_m));
  const double nodes =
      static_cast<double>(steps + 1) * static_cast<double>(lattice.size()) * beliefs;
  if (nodes > static_cast<double>(config.node_cap))
    throw SizeLimitError("value grid would have " + std::to_string(nodes) +
                         " nodes, above the cap " + std::to_string(config.node_cap));

  std::vector<double> a = artificial_diffusion(spec, lattice, config.seed);
  double courant = 0.0;
  for (double v : a) courant += config.dt * v / config.dx;
  if (courant > 1.0 + 1e-12)
    throw CflViolation("CFL condition fails: dt * sum_d a_d / dx = " + std::to_string(courant) +
                       " > 1 (dt = " + std::to_string(config.dt) +
                       ", dx = " + std::to_string(config.dx) + ")");

  const double radius =
      static_cast<double>(lattice.counts()[0] / 2) * config.dx;  // half-width of the box
  const double gap = isaacs_probe(spec, radius, config.probe_samples, config.seed);
  if (gap > config.isaacs_tol)
    throw IsaacsViolation("Isaacs condition fails on the probe set: max H+ - H- = " +
                          std::to_string(gap));

  std::vector<double> times(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    times[i] = spec.t0 + (1.0 - spec.t0) * static_cast<double>(i) / static_cast<double>(steps);
  auto grid_ptr = std::make_shared<const SimplexGrid>(nkl, config.belief_m);
  const JointShape shape{spec.num_k, spec.num_l};
  ValueGrid grid(std::move(times), std::move(lattice), grid_ptr, shape, std::move(a));

  const StateLattice& lat = grid.lattice();
  for (std::size_t s = 0; s < lat.size(); ++s) {
    const Point x = lat.point(s);
    std::vector<double> g(nkl);
    for (std::size_t c = 0; c < nkl; ++c) g[c] = spec.terminal(c / spec.num_l, c % spec.num_l, x);
    for (std::size_t b = 0; b < grid_ptr->size(); ++b) {
      double v = 0.0;
      for (std::size_t c = 0; c < nkl; ++c) v += grid_ptr->coordinate(b, c) * g[c];
      grid.at(steps, s, b) = v;
    }
  }

  std::unique_ptr<FiberPlan> k_plan, l_plan;
  if (spec.num_k > 1) k_plan = std::make_unique<FiberPlan>(grid_ptr, shape, FiberSide::kK);
  if (spec.num_l > 1) l_plan = std::make_unique<FiberPlan>(grid_ptr, shape, FiberSide::kL);
  for (std::size_t i = steps; i-- > 0;)
    hj_step(spec, grid, i, k_plan.get(), l_plan.get(), config.order, config.isaacs_tol,
            config.threads);
  return grid;
}

// ---------------------------------------------------------------------------
// Verification.

namespace {

std::string node_witness(const ValueGrid& g, std::size_t i, std::size_t s) {
  return "t = " + format_point(std::vector<double>{g.times()[i]}) +
         ", x = " + format_point(g.lattice().point(s));
}

// A conjugation direction: a fiber of one side and a dual vector.
struct Direction {
  std::size_t fiber;
  std::vector<double> dual;
};

// Dual vectors tied to the initial slice at the node of z: for every belief
// grid point the canonical supergradient (side K) or the negated
// subgradient (side L) of its fiber function; then random draws.
std::vector<Direction> directions(const ValueGrid& g, const FiberPlan& plan, std::size_t node,
                                  std::size_t draws, std::uint64_t seed) {
  const bool k_side = plan.side() == FiberSide::kK;
  std::vector<Direction> out;
  const auto initial = g.table(0, node);
  double scale = 1.0;
  for (double v : g.values()) scale = std::max(scale, std::abs(v) + 1.0);
  for (std::size_t fi = 0; fi < plan.fibers().size(); ++fi) {
    const auto& fiber = plan.fibers()[fi];
    ValueTable f(plan.marginal_grid_ptr(), plan.restrict(fiber, initial));
    const ValueTable hull = k_side ? cav(f).envelope : vex(f).envelope;
    for (const auto& member : fiber.members) {
      std::vector<double> y = k_side ? superdifferential(hull, member.second, 1e-7)
                                     : subdifferential(hull, member.second, 1e-7);
      if (!k_side)
        for (double& v : y) v = -v;
      out.push_back({fi, std::move(y)});
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, plan.fibers().size() - 1);
  std::uniform_real_distribution<double> unit(-scale, scale);
  const std::size_t dim = plan.marginal_grid().dimension();
  for (std::size_t r = 0; r < draws; ++r) {
    Direction d{pick(rng), std::vector<double>(dim)};
    for (double& v : d.dual) v = unit(rng);
    out.push_back(std::move(d));
  }
  return out;
}

struct Residual {
  double value = 0.0;
  std::size_t time = 0, node = 0, direction = 0;
};

// side K: S(t, x) = max_p V(t, x, p (x) Q) - <zeta, p>, residual of
//   S_i <= S_{i+1} + dt H^(S_{i+1});
// side L: T(t, x) = min_q V(t, x, q (x) P) + <q, eta>, residual of
//   T_i >= T_{i+1} + dt H^(T_{i+1}).
Residual conjugate_residual(const ValueGrid& g, const MayerSpec& spec, const FiberPlan& plan,
                            const std::vector<Direction>& dirs) {
  const bool k_side = plan.side() == FiberSide::kK;
  const StateLattice& lat = g.lattice();
  const std::size_t nt = g.num_times(), ns = lat.size(), nm = plan.marginal_grid().size();
  Residual worst;
  std::vector<double> conj(nt * ns), dm(lat.dimension()), dp(lat.dimension());
  for (std::size_t di = 0; di < dirs.size(); ++di) {
    const auto& fiber = plan.fibers()[dirs[di].fiber];
    const auto& y = dirs[di].dual;
    for (std::size_t i = 0; i < nt; ++i)
      for (std::size_t s = 0; s < ns; ++s) {
        const auto vals = plan.restrict(fiber, g.table(i, s));
        double best = k_side ? -std::numeric_limits<double>::infinity()
                             : std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nm; ++j) {
          double lin = 0.0;
          for (std::size_t c = 0; c < y.size(); ++c)
            lin += y[c] * plan.marginal_grid().coordinate(j, c);
          best = k_side ? std::max(best, vals[j] - lin) : std::min(best, vals[j] + lin);
        }
        conj[i * ns + s] = best;
      }
    for (std::size_t i = 0; i + 1 < nt; ++i) {
      const double dt = g.times()[i + 1] - g.times()[i];
      for (std::size_t s = 0; s < ns; ++s) {
        if (!lat.interior(s)) continue;
        differences(lat, s, [&](std::size_t n) { return conj[(i + 1) * ns + n]; }, dm, dp);
        const double h = hamiltonian(spec, g.times()[i + 1], lat.point(s),
                                     [&] {
                                       std::vector<double> c(dm.size());
                                       for (std::size_t d = 0; d < c.size(); ++d)
                                         c[d] = 0.5 * (dm[d] + dp[d]);
                                       return c;
                                     }())
                             .upper;
        double diffusion = 0.0;
        for (std::size_t d = 0; d < dm.size(); ++d)
          diffusion += 0.5 * g.diffusion()[d] * (dp[d] - dm[d]);
        const double scheme = conj[(i + 1) * ns + s] + dt * (h + diffusion);
        const double r = (k_side ? conj[i * ns + s] - scheme : scheme - conj[i * ns + s]) / dt;
        if (r > worst.value) worst = {r, i, s, di};
      }
    }
  }
  return worst;
}

struct ShapeDefect {
  double value = 0.0;
  std::size_t time = 0, node = 0, fiber = 0, marginal = 0;
};

ShapeDefect shape_defect(const ValueGrid& g, const FiberPlan& plan) {
  ShapeDefect worst;
  for (std::size_t i = 0; i + 1 < g.num_times(); ++i)
    for (std::size_t s = 0; s < g.lattice().size(); ++s) {
      const auto t = g.table(i, s);
      const ValueTable w(g.beliefs_ptr(), std::vector<double>(t.begin(), t.end()));
      const FiberDefect d = fiber_defect(w, plan);
      if (d.defect > worst.value) worst = {d.defect, i, s, d.fiber, d.marginal_index};
    }
  return worst;
}

std::string shape_witness(const ValueGrid& g, const FiberPlan& plan, const ShapeDefect& d) {
  return node_witness(g, d.time, d.node) + ", pi = " +
         format_point(plan.fiber_point(plan.fibers()[d.fiber], d.marginal));
}

std::string residual_witness(const ValueGrid& g, const FiberPlan& plan,
                             const std::vector<Direction>& dirs, const Residual& r) {
  if (dirs.empty()) return {};
  const auto& dir = dirs[r.direction];
  const bool k_side = plan.side() == FiberSide::kK;
  return node_witness(g, r.time, r.node) + (k_side ? ", zeta = " : ", eta = ") +
         format_point(dir.dual) + (k_side ? ", Q = " : ", P = ") +
         format_point(plan.fibers()[dir.fiber].conditionals.data());
}

double residual_tolerance(const ValueGrid& g, const DualCheckOptions& o) {
  return o.residual_scale * (g.dt() + g.lattice().dx());
}

struct Conjugates {
  FiberPlan k_plan, l_plan;
  std::vector<Direction> k_dirs, l_dirs;
};

Conjugates conjugates(const ValueGrid& g, const MayerSpec& spec, const DualCheckOptions& o) {
  const std::size_t z = g.lattice().index_of(spec.z);
  FiberPlan k_plan(g.beliefs_ptr(), g.shape(), FiberSide::kK);
  FiberPlan l_plan(g.beliefs_ptr(), g.shape(), FiberSide::kL);
  auto k_dirs = directions(g, k_plan, z, o.random_draws, o.seed);
  auto l_dirs = directions(g, l_plan, z, o.random_draws, o.seed + 1);
  return {std::move(k_plan), std::move(l_plan), std::move(k_dirs), std::move(l_dirs)};
}

void check_compatible(const ValueGrid& g, const MayerSpec& spec) {
  if (g.shape().num_k != spec.num_k || g.shape().num_l != spec.num_l ||
      g.lattice().dimension() != spec.state_dim)
    throw ValidationError("value grid does not match the game");
}

}  // namespace

VerificationReport check_dual_solution(const ValueGrid& g, const MayerSpec& spec,
                                       const DualCheckOptions& options) {
  validate(spec);
  check_compatible(g, spec);
  VerificationReport report;
  const Conjugates c = conjugates(g, spec, options);

  const ShapeDefect dk = shape_defect(g, c.k_plan);
  report.add("k_concavity", dk.value, options.shape_tol, shape_witness(g, c.k_plan, dk));
  const ShapeDefect dl = shape_defect(g, c.l_plan);
  report.add("l_convexity", dl.value, options.shape_tol, shape_witness(g, c.l_plan, dl));

  const StateLattice& lat = g.lattice();
  const std::size_t last = g.num_times() - 1, nkl = spec.num_k * spec.num_l;
  double terminal = 0.0, gmax = 0.0;
  std::size_t ts = 0, tb = 0;
  for (std::size_t s = 0; s < lat.size(); ++s) {
    const Point x = lat.point(s);
    std::vector<double> gv(nkl);
    for (std::size_t k = 0; k < nkl; ++k) {
      gv[k] = spec.terminal(k / spec.num_l, k % spec.num_l, x);
      gmax = std::max(gmax, std::abs(gv[k]));
    }
    for (std::size_t b = 0; b < g.beliefs().size(); ++b) {
      double expect = 0.0;
      for (std::size_t k = 0; k < nkl; ++k) expect += g.beliefs().coordinate(b, k) * gv[k];
      const double err = std::abs(g.at(last, s, b) - expect);
      if (err > terminal) {
        terminal = err;
        ts = s;
        tb = b;
      }
    }
  }
  report.add("terminal", terminal, options.terminal_tol * (1.0 + gmax),
             node_witness(g, last, ts) + ", pi = " + format_point(g.beliefs().point(tb)));

  const double tol = residual_tolerance(g, options);
  const Residual rk = conjugate_residual(g, spec, c.k_plan, c.k_dirs);
  report.add("k_subsolution", rk.value, tol, residual_witness(g, c.k_plan, c.k_dirs, rk));
  const Residual rl = conjugate_residual(g, spec, c.l_plan, c.l_dirs);
  report.add("l_supersolution", rl.value, tol, residual_witness(g, c.l_plan, c.l_dirs, rl));
  return report;
}

std::string_view to_string(ComparisonStatus status) {
  switch (status) {
    case ComparisonStatus::kHolds:
      return "holds";
    case ComparisonStatus::kHypothesisViolated:
      return "hypothesis_violated";
    case ComparisonStatus::kConclusionViolated:
      return "conclusion_violated";
  }
  return "unknown";
}

ComparisonReport compare(const ValueGrid& w1, const ValueGrid& w2, const MayerSpec& spec,
                         const DualCheckOptions& options) {
  validate(spec);
  check_compatible(w1, spec);
  if (!(w1.lattice() == w2.lattice()) || !(w1.beliefs() == w2.beliefs()) ||
      w1.num_times() != w2.num_times() ||
      !std::equal(w1.times().begin(), w1.times().end(), w2.times().begin()))
    throw ValidationError("compared grids must share times, lattice and belief grid");

  ComparisonReport out;
  const Conjugates c1 = conjugates(w1, spec, options);
  const Conjugates c2 = conjugates(w2, spec, options);
  const double tol = residual_tolerance(w1, options);

  auto& h = out.hypotheses;
  const ShapeDefect k1 = shape_defect(w1, c1.k_plan), l1 = shape_defect(w1, c1.l_plan);
  const ShapeDefect k2 = shape_defect(w2, c2.k_plan), l2 = shape_defect(w2, c2.l_plan);
  h.add("w1_k_concavity", k1.value, options.shape_tol, shape_witness(w1, c1.k_plan, k1));
  h.add("w1_l_convexity", l1.value, options.shape_tol, shape_witness(w1, c1.l_plan, l1));
  h.add("w2_k_concavity", k2.value, options.shape_tol, shape_witness(w2, c2.k_plan, k2));
  h.add("w2_l_convexity", l2.value, options.shape_tol, shape_witness(w2, c2.l_plan, l2));
  const Residual sup1 = conjugate_residual(w1, spec, c1.l_plan, c1.l_dirs);
  h.add("w1_l_supersolution", sup1.value, tol, residual_witness(w1, c1.l_plan, c1.l_dirs, sup1));
  const Residual sub2 = conjugate_residual(w2, spec, c2.k_plan, c2.k_dirs);
  h.add("w2_k_subsolution", sub2.value, tol, residual_witness(w2, c2.k_plan, c2.k_dirs, sub2));

  const StateLattice& lat = w1.lattice();
  const std::size_t nb = w1.beliefs().size(), last = w1.num_times() - 1;
  auto worst_excess = [&](std::size_t i_lo, std::size_t i_hi, std::string& witness) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = i_lo; i < i_hi; ++i)
      for (std::size_t s = 0; s < lat.size(); ++s)
        for (std::size_t b = 0; b < nb; ++b) {
          const double e = w2.at(i, s, b) - w1.at(i, s, b);
          if (e > worst) {
            worst = e;
            witness = node_witness(w1, i, s) + ", pi = " + format_point(w1.beliefs().point(b));
          }
        }
    return worst;
  };
  std::string terminal_witness;
  const double terminal = worst_excess(last, last + 1, terminal_witness);
  h.add("terminal_order", std::max(0.0, terminal), 0.0, terminal_witness);

  const double horizon = w1.times().back() - w1.times().front();
  out.slack = 2.0 * tol * horizon + 1e-12;
  out.worst = worst_excess(0, w1.num_times(), out.witness);
  if (!h.passed())
    out.status = ComparisonStatus::kHypothesisViolated;
  else if (out.worst > out.slack)
    out.status = ComparisonStatus::kConclusionViolated;
  else
    out.status = ComparisonStatus::kHolds;
  return out;
}

}  // namespace mzdual
