#include "mzdual/differential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mzdual/errors.hpp"

namespace mzdual {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void check_controls(const std::vector<Point>& controls, const char* name) {
  require(!controls.empty(), std::string(name) + " must not be empty");
  for (const Point& c : controls) {
    require(c.size() == controls[0].size(),
            std::string(name) + " points must share one dimension");
    for (double v : c) require(std::isfinite(v), std::string(name) + " must be finite");
  }
}

void check_bounds(const DeclaredBounds& b) {
  require(std::isfinite(b.bound) && b.bound >= 0.0, "bound must be finite and >= 0");
  require(std::isfinite(b.lipschitz) && b.lipschitz >= 0.0,
          "lipschitz must be finite and >= 0");
  require(std::isfinite(b.terminal_lipschitz) && b.terminal_lipschitz >= 0.0,
          "terminal_lipschitz must be finite and >= 0");
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Random (t, x) in [t0, 1] x box(center, radius); a second point either far
// or within 1e-3 of the first.
struct SamplePair {
  double t, s;
  Point x, y;
};

SamplePair sample_pair(std::mt19937_64& rng, double t0, std::span<const double> center,
                       double radius, bool near) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SamplePair p;
  p.t = t0 + (1.0 - t0) * unit(rng);
  p.x.resize(center.size());
  for (std::size_t d = 0; d < center.size(); ++d)
    p.x[d] = center[d] + radius * (2.0 * unit(rng) - 1.0);
  if (near) {
    p.s = std::clamp(p.t + 1e-3 * (2.0 * unit(rng) - 1.0), t0, 1.0);
    p.y = p.x;
    for (double& v : p.y) v += 1e-3 * (2.0 * unit(rng) - 1.0);
  } else {
    p.s = t0 + (1.0 - t0) * unit(rng);
    p.y.resize(center.size());
    for (std::size_t d = 0; d < center.size(); ++d)
      p.y[d] = center[d] + radius * (2.0 * unit(rng) - 1.0);
  }
  return p;
}

void record(SampledConstants& seen, std::span<const double> f1, std::span<const double> f2,
            double step) {
  for (double v : f1) seen.bound = std::max(seen.bound, std::abs(v));
  for (double v : f2) seen.bound = std::max(seen.bound, std::abs(v));
  if (step > 0.0) seen.lipschitz = std::max(seen.lipschitz, distance(f1, f2) / step);
}

void enforce(const SampledConstants& seen, const DeclaredBounds& declared) {
  const double slack = 1e-9;
  if (seen.bound > declared.bound * (1.0 + slack) + slack)
    throw DeclaredBoundError("sampled dynamics magnitude " + std::to_string(seen.bound) +
                             " exceeds declared bound " + std::to_string(declared.bound));
  if (seen.lipschitz > declared.lipschitz * (1.0 + slack) + 1e-6)
    throw DeclaredBoundError("sampled Lipschitz quotient " + std::to_string(seen.lipschitz) +
                             " exceeds declared constant " +
                             std::to_string(declared.lipschitz));
}

// Matrix of <phi(t, x, u_i, v_j), xi>.
Matrix hamiltonian_matrix(const MayerSpec& spec, double t, std::span<const double> x,
                          std::span<const double> xi) {
  Matrix m(spec.controls_u.size(), spec.controls_v.size());
  std::vector<double> f(spec.state_dim);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      spec.dynamics(t, x, spec.controls_u[i], spec.controls_v[j], f);
      m(i, j) = dot(f, xi);
    }
  return m;
}

}  // namespace

void validate(const DifferentialGameSpec& spec) {
  require(spec.num_k >= 1 && spec.num_l >= 1, "type sets must be nonempty");
  require(spec.t0 >= 0.0 && spec.t0 < 1.0, "t0 must lie in [0, 1)");
  require(spec.x0.size() == spec.num_k * spec.num_l, "one initial state per type pair");
  for (const Point& x : spec.x0) require(x.size() == spec.state_dim, "initial state size");
  check_controls(spec.controls_u, "controls_u");
  check_controls(spec.controls_v, "controls_v");
  require(static_cast<bool>(spec.dynamics) || spec.state_dim == 0, "dynamics missing");
  require(static_cast<bool>(spec.running), "running payoff missing");
  require(static_cast<bool>(spec.terminal), "terminal payoff missing");
  check_bounds(spec.bounds);
}

void validate(const MayerSpec& spec) {
  require(spec.num_k >= 1 && spec.num_l >= 1, "type sets must be nonempty");
  require(spec.t0 >= 0.0 && spec.t0 < 1.0, "t0 must lie in [0, 1)");
  require(spec.state_dim >= 1, "state dimension must be positive");
  require(spec.z.size() == spec.state_dim, "initial state size");
  check_controls(spec.controls_u, "controls_u");
  check_controls(spec.controls_v, "controls_v");
  require(static_cast<bool>(spec.dynamics), "dynamics missing");
  require(static_cast<bool>(spec.terminal), "terminal payoff missing");
  check_bounds(spec.bounds);
}

SampledConstants check_declared_bounds(const DifferentialGameSpec& spec, std::size_t samples,
                                       std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_u(0, spec.controls_u.size() - 1),
      pick_v(0, spec.controls_v.size() - 1), pick_b(0, spec.num_k * spec.num_l - 1);
  const double radius = 1.0 + spec.bounds.bound;
  SampledConstants seen;
  const std::size_t n = spec.state_dim;
  std::vector<double> f1(n + 1), f2(n + 1);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t b = pick_b(rng), k = b / spec.num_l, l = b % spec.num_l;
    const auto& u = spec.controls_u[pick_u(rng)];
    const auto& v = spec.controls_v[pick_v(rng)];
    const SamplePair p = sample_pair(rng, spec.t0, spec.x0[b], radius, s % 2 == 1);
    f1[0] = spec.running(k, l, p.t, p.x, u, v);
    f2[0] = spec.running(k, l, p.s, p.y, u, v);
    if (n > 0) {
      spec.dynamics(k, l, p.t, p.x, u, v, std::span<double>(f1).subspan(1));
      spec.dynamics(k, l, p.s, p.y, u, v, std::span<double>(f2).subspan(1));
    }
    const double step = std::abs(p.t - p.s) + distance(p.x, p.y);
    // Running payoff and dynamics are declared Lipschitz separately.
    record(seen, std::span<const double>(f1).first(1), std::span<const double>(f2).first(1),
           step);
    record(seen, std::span<const double>(f1).subspan(1), std::span<const double>(f2).subspan(1),
           step);
  }
  enforce(seen, spec.bounds);
  return seen;
}

SampledConstants check_declared_bounds(const MayerSpec& spec, std::size_t samples,
                                       std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_u(0, spec.controls_u.size() - 1),
      pick_v(0, spec.controls_v.size() - 1);
  const double radius = 1.0 + spec.bounds.bound;
  SampledConstants seen;
  std::vector<double> f1(spec.state_dim), f2(spec.state_dim);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto& u = spec.controls_u[pick_u(rng)];
    const auto& v = spec.controls_v[pick_v(rng)];
    const SamplePair p = sample_pair(rng, spec.t0, spec.z, radius, s % 2 == 1);
    spec.dynamics(p.t, p.x, u, v, f1);
    spec.dynamics(p.s, p.y, u, v, f2);
    record(seen, f1, f2, std::abs(p.t - p.s) + distance(p.x, p.y));
  }
  enforce(seen, spec.bounds);
  return seen;
}

MayerSpec reduce_to_mayer(const DifferentialGameSpec& spec) {
  validate(spec);
  const std::size_t n = spec.state_dim, blocks = spec.num_k * spec.num_l, width = n + 1;
  MayerSpec out;
  out.num_k = spec.num_k;
  out.num_l = spec.num_l;
  out.state_dim = blocks * width;
  out.t0 = spec.t0;
  out.z.assign(out.state_dim, 0.0);
  for (std::size_t b = 0; b < blocks; ++b)
    std::copy(spec.x0[b].begin(), spec.x0[b].end(), out.z.begin() + b * width + 1);
  out.controls_u = spec.controls_u;
  out.controls_v = spec.controls_v;
  out.mode = spec.mode;
  const std::size_t num_l = spec.num_l;
  out.dynamics = [dyn = spec.dynamics, run = spec.running, blocks, width, n, num_l](
                     double t, std::span<const double> x, std::span<const double> u,
                     std::span<const double> v, std::span<double> f) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const auto xb = x.subspan(b * width + 1, n);
      f[b * width] = run(b / num_l, b % num_l, t, xb, u, v);
      if (n > 0) dyn(b / num_l, b % num_l, t, xb, u, v, f.subspan(b * width + 1, n));
    }
  };
  out.terminal = [g = spec.terminal, width, n, num_l](std::size_t k, std::size_t l,
                                                      std::span<const double> x) {
    const std::size_t b = k * num_l + l;
    return x[b * width] + g(k, l, x.subspan(b * width + 1, n));
  };
  // Each block (running, f) is 2L-Lipschitz; stacking the blocks costs a
  // factor sqrt(KL) on the time increment at most.
  out.bounds.bound = spec.bounds.bound;
  out.bounds.lipschitz = 2.0 * spec.bounds.lipschitz * std::sqrt(static_cast<double>(blocks));
  out.bounds.terminal_lipschitz = 1.0 + spec.bounds.terminal_lipschitz;
  return out;
}

std::size_t step_count(double t0, double dt) {
  const double horizon = 1.0 - t0;
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  const double ratio = horizon / dt;
  const double steps = std::round(ratio);
  require(steps >= 1.0 && std::abs(steps - ratio) <= 1e-9 * std::max(1.0, ratio),
          "dt must divide the horizon 1 - t0");
  return static_cast<std::size_t>(steps);
}

namespace {

void check_path(const ControlPath& path, std::size_t steps, std::size_t nu, std::size_t nv) {
  require(path.u.size() == steps && path.v.size() == steps,
          "control path length must equal the number of steps");
  for (std::size_t s = 0; s < steps; ++s)
    require(path.u[s] < nu && path.v[s] < nv, "control index out of range");
}

}  // namespace

std::vector<double> bolza_payoffs(const DifferentialGameSpec& spec, const ControlPath& path,
                                  double dt) {
  validate(spec);
  const std::size_t steps = step_count(spec.t0, dt);
  check_path(path, steps, spec.controls_u.size(), spec.controls_v.size());
  std::vector<double> out(spec.num_k * spec.num_l);
  std::vector<double> f(spec.state_dim);
  for (std::size_t b = 0; b < out.size(); ++b) {
    const std::size_t k = b / spec.num_l, l = b % spec.num_l;
    Point x = spec.x0[b];
    double integral = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const double t = spec.t0 + static_cast<double>(s) * dt;
      const auto& u = spec.controls_u[path.u[s]];
      const auto& v = spec.controls_v[path.v[s]];
      integral += dt * spec.running(k, l, t, x, u, v);
      if (spec.state_dim > 0) {
        spec.dynamics(k, l, t, x, u, v, f);
        for (std::size_t d = 0; d < x.size(); ++d) x[d] += dt * f[d];
      }
    }
    out[b] = integral + spec.terminal(k, l, x);
  }
  return out;
}

std::vector<double> mayer_payoffs(const MayerSpec& spec, const ControlPath& path, double dt) {
  validate(spec);
  const std::size_t steps = step_count(spec.t0, dt);
  check_path(path, steps, spec.controls_u.size(), spec.controls_v.size());
  Point x = spec.z;
  std::vector<double> f(spec.state_dim);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = spec.t0 + static_cast<double>(s) * dt;
    spec.dynamics(t, x, spec.controls_u[path.u[s]], spec.controls_v[path.v[s]], f);
    for (std::size_t d = 0; d < x.size(); ++d) x[d] += dt * f[d];
  }
  std::vector<double> out(spec.num_k * spec.num_l);
  for (std::size_t b = 0; b < out.size(); ++b)
    out[b] = spec.terminal(b / spec.num_l, b % spec.num_l, x);
  return out;
}

double euler_error_constant(const DeclaredBounds& bounds, std::size_t state_dim) {
  const double l = bounds.lipschitz;
  return (1.0 + std::sqrt(static_cast<double>(state_dim)) * bounds.bound) * (1.0 + l) *
         (1.0 + l) * (1.0 + bounds.terminal_lipschitz) * std::exp(l);
}

HamiltonianPair hamiltonian(const MayerSpec& spec, double t, std::span<const double> x,
                            std::span<const double> xi) {
  const Matrix m = hamiltonian_matrix(spec, t, x, xi);
  if (spec.mode == ControlMode::kMixed) {
    const double v = matrix_game_value(m);
    return {v, v};
  }
  HamiltonianPair h;
  h.lower = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    h.lower = std::max(h.lower, *std::min_element(r.begin(), r.end()));
  }
  h.upper = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.rows(); ++i) best = std::max(best, m(i, j));
    h.upper = std::min(h.upper, best);
  }
  return h;
}

double isaacs_hamiltonian(const MayerSpec& spec, double t, std::span<const double> x,
                          std::span<const double> xi, double tol) {
  const HamiltonianPair h = hamiltonian(spec, t, x, xi);
  if (h.gap() > tol)
    throw IsaacsViolation("Isaacs condition fails: H- = " + std::to_string(h.lower) +
                          ", H+ = " + std::to_string(h.upper) + " at t = " +
                          std::to_string(t));
  return h.upper;
}

double isaacs_probe(const MayerSpec& spec, double radius, std::size_t samples,
                    std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  std::vector<double> xi(spec.state_dim);
  for (std::size_t s = 0; s < samples; ++s) {
    const SamplePair p = sample_pair(rng, spec.t0, spec.z, radius, false);
    for (double& v : xi) v = normal(rng);
    worst = std::max(worst, hamiltonian(spec, p.t, p.x, xi).gap());
  }
  return worst;
}

double hamiltonian_regularity_probe(const MayerSpec& spec, double radius, std::size_t pairs,
                                    std::uint64_t seed) {
  validate(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  std::vector<double> xi(spec.state_dim);
  for (std::size_t s = 0; s < pairs; ++s) {
    const SamplePair p = sample_pair(rng, spec.t0, spec.z, radius, s % 2 == 1);
    for (double& v : xi) v = normal(rng);
    const double step = norm2(xi) * (std::abs(p.t - p.s) + distance(p.x, p.y));
    if (step <= 0.0) continue;
    const double h1 = hamiltonian(spec, p.t, p.x, xi).upper;
    const double h2 = hamiltonian(spec, p.s, p.y, xi).upper;
    worst = std::max(worst, std::abs(h1 - h2) / step);
  }
  if (worst > 1.01 * spec.bounds.lipschitz + 1e-9)
    throw DeclaredBoundError("Hamiltonian regularity quotient " + std::to_string(worst) +
                             " exceeds 1.01 x declared Lipschitz constant " +
                             std::to_string(spec.bounds.lipschitz));
  return worst;
}

namespace {

std::vector<Point> action_points(std::size_t n) {
  std::vector<Point> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {static_cast<double>(i)};
  return out;
}

}  // namespace

MayerSpec repeated_game_embedding(const MatrixGameFamily& family) {
  MayerSpec spec;
  spec.num_k = family.num_k();
  spec.num_l = family.num_l();
  spec.state_dim = spec.num_k * spec.num_l;
  spec.z.assign(spec.state_dim, 0.0);
  spec.controls_u = action_points(family.num_i());
  spec.controls_v = action_points(family.num_j());
  spec.mode = ControlMode::kMixed;
  spec.dynamics = [family](double, std::span<const double>, std::span<const double> u,
                           std::span<const double> v, std::span<double> f) {
    const auto i = static_cast<std::size_t>(u[0]), j = static_cast<std::size_t>(v[0]);
    for (std::size_t k = 0; k < family.num_k(); ++k)
      for (std::size_t l = 0; l < family.num_l(); ++l)
        f[k * family.num_l() + l] = family.payoff(k, l)(i, j);
  };
  const std::size_t num_l = spec.num_l;
  spec.terminal = [num_l](std::size_t k, std::size_t l, std::span<const double> x) {
    return x[k * num_l + l];
  };
  spec.bounds = {family.max_abs(), 0.0, 1.0};
  return spec;
}

DifferentialGameSpec repeated_game_bolza(const MatrixGameFamily& family) {
  DifferentialGameSpec spec;
  spec.num_k = family.num_k();
  spec.num_l = family.num_l();
  spec.state_dim = 0;
  spec.x0.assign(spec.num_k * spec.num_l, Point{});
  spec.controls_u = action_points(family.num_i());
  spec.controls_v = action_points(family.num_j());
  spec.mode = ControlMode::kMixed;
  spec.dynamics = [](std::size_t, std::size_t, double, std::span<const double>,
                     std::span<const double>, std::span<const double>, std::span<double>) {};
  spec.running = [family](std::size_t k, std::size_t l, double, std::span<const double>,
                          std::span<const double> u, std::span<const double> v) {
    return family.payoff(k, l)(static_cast<std::size_t>(u[0]), static_cast<std::size_t>(v[0]));
  };
  spec.terminal = [](std::size_t, std::size_t, std::span<const double>) { return 0.0; };
  spec.bounds = {family.max_abs(), 0.0, 0.0};
  return spec;
}

MayerSpec linear_game(std::size_t num_k, std::size_t num_l, const LinearDynamics& dyn,
                      Point z, std::vector<Point> controls_u, std::vector<Point> controls_v,
                      DeclaredBounds bounds, ControlMode mode) {
  const std::size_t n = z.size();
  require(n >= 1, "linear game needs a state");
  check_controls(controls_u, "controls_u");
  check_controls(controls_v, "controls_v");
  require(dyn.a.rows() == n && dyn.a.cols() == n, "A must be n x n");
  require(dyn.b.rows() == n && dyn.b.cols() == controls_u[0].size(), "B must be n x dim(u)");
  require(dyn.c.rows() == n && dyn.c.cols() == controls_v[0].size(), "C must be n x dim(v)");
  require(dyn.drift.empty() || dyn.drift.size() == n, "drift must have n entries");
  require(dyn.terminal_weights.size() == num_k * num_l, "one terminal weight per type pair");
  for (const auto& w : dyn.terminal_weights) require(w.size() == n, "terminal weight size");
  require(dyn.terminal_offsets.empty() || dyn.terminal_offsets.size() == num_k * num_l,
          "one terminal offset per type pair");
  MayerSpec spec;
  spec.num_k = num_k;
  spec.num_l = num_l;
  spec.state_dim = n;
  spec.z = std::move(z);
  spec.controls_u = std::move(controls_u);
  spec.controls_v = std::move(controls_v);
  spec.bounds = bounds;
  spec.mode = mode;
  spec.dynamics = [dyn](double, std::span<const double> x, std::span<const double> u,
                        std::span<const double> v, std::span<double> f) {
    for (std::size_t r = 0; r < f.size(); ++r)
      f[r] = dot(dyn.a.row(r), x) + dot(dyn.b.row(r), u) + dot(dyn.c.row(r), v) +
             (dyn.drift.empty() ? 0.0 : dyn.drift[r]);
  };
  spec.terminal = [dyn, num_l](std::size_t k, std::size_t l, std::span<const double> x) {
    const std::size_t b = k * num_l + l;
    return dot(dyn.terminal_weights[b], x) +
           (dyn.terminal_offsets.empty() ? 0.0 : dyn.terminal_offsets[b]);
  };
  return spec;
}

MayerSpec bilinear_game(std::size_t dim, std::vector<Point> controls_u,
                        std::vector<Point> controls_v, DeclaredBounds bounds) {
  require(dim >= 1, "bilinear game needs a state");
  check_controls(controls_u, "controls_u");
  check_controls(controls_v, "controls_v");
  require(controls_u[0].size() == dim && controls_v[0].size() == dim,
          "bilinear controls must match the state dimension");
  MayerSpec spec;
  spec.state_dim = dim;
  spec.z.assign(dim, 0.0);
  spec.controls_u = std::move(controls_u);
  spec.controls_v = std::move(controls_v);
  spec.bounds = bounds;
  spec.dynamics = [](double, std::span<const double>, std::span<const double> u,
                     std::span<const double> v, std::span<double> f) {
    for (std::size_t d = 0; d < f.size(); ++d) f[d] = u[d] * v[d];
  };
  spec.terminal = [](std::size_t, std::size_t, std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  };
  return spec;
}

}  // namespace mzdual
