#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the code path it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "mzdual/belief.hpp"
#include "mzdual/differential.hpp"
#include "mzdual/lp.hpp"
#include "mzdual/matrix.hpp"

namespace oracle {

using mzdual::Matrix;

// Solves the square system M x = r by Gaussian elimination with partial
// pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_square(Matrix m, std::vector<double> r) {
  const std::size_t n = r.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < n; ++i)
      if (std::abs(m(i, c)) > std::abs(m(piv, c))) piv = i;
    if (std::abs(m(piv, c)) < 1e-12) return std::nullopt;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
      std::swap(r[c], r[piv]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c) continue;
      const double f = m(i, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
      r[i] -= f * r[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) r[i] /= m(i, i);
  return r;
}

// max c.x s.t. A x <= b, x >= 0 by enumerating every basic solution. Only
// for tiny instances; returns nullopt if no vertex is feasible.
inline std::optional<double> lp_by_vertex_enumeration(const std::vector<double>& c,
                                                      const Matrix& a,
                                                      const std::vector<double>& b) {
  const std::size_t n = c.size(), m = a.rows();
  const std::size_t total = m + n;
  // Row t of the full system: t < m is a constraint, otherwise x_{t-m} = 0.
  auto row = [&](std::size_t t, std::size_t j) {
    return t < m ? a(t, j) : (t - m == j ? -1.0 : 0.0);
  };
  auto rhs = [&](std::size_t t) { return t < m ? b[t] : 0.0; };
  std::optional<double> best;
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == n) {
      Matrix sys(n, n);
      std::vector<double> r(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) sys(i, j) = row(pick[i], j);
        r[i] = rhs(pick[i]);
      }
      auto x = solve_square(sys, r);
      if (!x) return;
      for (std::size_t t = 0; t < total; ++t) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) lhs += row(t, j) * (*x)[j];
        if (lhs > rhs(t) + 1e-9) return;
      }
      double obj = 0.0;
      for (std::size_t j = 0; j < n; ++j) obj += c[j] * (*x)[j];
      if (!best || obj > *best) best = obj;
      return;
    }
    for (std::size_t t = start; t < total; ++t) {
      pick[depth] = t;
      rec(t + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Value and optimal strategies of a 2x2 zero-sum game from the saddle-point
// test and the indifference formulas.
struct TwoByTwo {
  double value;
  double row_first;  // probability of row 0
  double col_first;  // probability of column 0
};

inline TwoByTwo solve_2x2(double a, double b, double c, double d) {
  const double maximin = std::max(std::min(a, b), std::min(c, d));
  const double minimax = std::min(std::max(a, c), std::max(b, d));
  if (std::abs(maximin - minimax) < 1e-15 || maximin >= minimax) {
    // Pure saddle point; strategies are not needed by callers in that case.
    return {maximin, std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN()};
  }
  const double den = a + d - b - c;
  return {(a * d - b * c) / den, (d - c) / den, (d - b) / den};
}

// Plain Fenchel transform phi*(y) = max_p <p, y> - phi(p) over the grid nodes.
inline double fenchel_transform(const mzdual::ValueTable& phi, const std::vector<double>& y) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < phi.size(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < y.size(); ++c) s += phi.grid().coordinate(i, c) * y[c];
    best = std::max(best, s - phi[i]);
  }
  return best;
}

// Concave envelope at grid node `point` through the dual (affine-majorant)
// formulation: min <a, x_point> s.t. <a, x_r> >= f(x_r) for every node r.
// Written against the LP core directly, independent of mzdual::cav.
inline double cav_by_majorant_lp(const mzdual::SimplexGrid& grid,
                                 const std::vector<double>& values, std::size_t point) {
  const std::size_t d = grid.dimension(), n = grid.size();
  mzdual::lp::Problem lp;
  lp.objective.resize(d);
  for (std::size_t c = 0; c < d; ++c) lp.objective[c] = -grid.coordinate(point, c);
  lp.constraints = Matrix(n, d);
  lp.relations.assign(n, mzdual::lp::Relation::kGreaterEqual);
  lp.rhs = values;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) lp.constraints(r, c) = grid.coordinate(r, c);
  lp.free_vars.assign(d, true);
  const auto s = mzdual::lp::solve_or_throw(lp);
  return -s.objective;
}

inline std::vector<double> random_simplex_point(std::mt19937_64& rng, std::size_t d,
                                                bool interior = true) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(d);
  double s = 0.0;
  for (double& v : p) {
    v = e(rng) + (interior ? 1e-3 : 0.0);
    s += v;
  }
  for (double& v : p) v /= s;
  return p;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

// Bolza payoff by classical Runge-Kutta on (integral, state) with `sub`
// substeps per control interval; independent of the library's Euler code.
inline std::vector<double> bolza_rk4(const mzdual::DifferentialGameSpec& spec, const mzdual::ControlPath& path,
                              double dt, int sub) {
  const std::size_t n = spec.state_dim;
  std::vector<double> out;
  for (std::size_t k = 0; k < spec.num_k; ++k)
    for (std::size_t l = 0; l < spec.num_l; ++l) {
      std::vector<double> y(n + 1, 0.0);
      for (std::size_t d = 0; d < n; ++d) y[d + 1] = spec.x0[k * spec.num_l + l][d];
      for (std::size_t step = 0; step < path.u.size(); ++step) {
        const auto& u = spec.controls_u[path.u[step]];
        const auto& v = spec.controls_v[path.v[step]];
        auto rhs = [&](double t, const std::vector<double>& s) {
          std::vector<double> f(n + 1);
          std::span<const double> x(s.data() + 1, n);
          f[0] = spec.running(k, l, t, x, u, v);
          if (n > 0) spec.dynamics(k, l, t, x, u, v, std::span<double>(f.data() + 1, n));
          return f;
        };
        const double h = dt / sub;
        for (int r = 0; r < sub; ++r) {
          const double t = spec.t0 + step * dt + r * h;
          auto axpy = [&](const std::vector<double>& a, double c, const std::vector<double>& b) {
            std::vector<double> o(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) o[i] = a[i] + c * b[i];
            return o;
          };
          const auto k1 = rhs(t, y);
          const auto k2 = rhs(t + h / 2, axpy(y, h / 2, k1));
          const auto k3 = rhs(t + h / 2, axpy(y, h / 2, k2));
          const auto k4 = rhs(t + h, axpy(y, h, k3));
          for (std::size_t i = 0; i <= n; ++i)
            y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        }
      }
      out.push_back(y[0] + spec.terminal(k, l, std::span<const double>(y.data() + 1, n)));
    }
  return out;
}

inline mzdual::DifferentialGameSpec random_bolza(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  mzdual::DifferentialGameSpec s;
  s.num_k = 2;
  s.num_l = 2;
  s.state_dim = 2;
  s.t0 = 0.0;
  for (int b = 0; b < 4; ++b) s.x0.push_back({unif(rng), unif(rng)});
  for (int r = 0; r < 3; ++r) {
    s.controls_u.push_back({unif(rng), unif(rng)});
    s.controls_v.push_back({unif(rng), unif(rng)});
  }
  // Per type pair: f_d = a sin(w_d . x + t + u_d - v_d), running
  // a cos(w_0 . x) u_0 v_1, terminal w_g . x; all constants known.
  std::vector<Matrix> w(4, Matrix(2, 2));
  std::vector<std::vector<double>> wg(4, std::vector<double>(2));
  const double a = 0.5 + 0.5 * std::abs(unif(rng));
  double lip = 0.0, lip_g = 0.0;
  for (int b = 0; b < 4; ++b) {
    double fnorm2 = 0.0, gnorm = 0.0;
    for (int d = 0; d < 2; ++d) {
      double rn = 0.0;
      for (int e = 0; e < 2; ++e) {
        w[b](d, e) = unif(rng);
        rn += w[b](d, e) * w[b](d, e);
      }
      const double ld = a * std::max(std::sqrt(rn), 1.0);
      fnorm2 += ld * ld;
      wg[b][d] = unif(rng);
      gnorm += wg[b][d] * wg[b][d];
    }
    lip = std::max(lip, std::sqrt(fnorm2));
    lip_g = std::max(lip_g, std::sqrt(gnorm));
  }
  s.dynamics = [w, a](std::size_t k, std::size_t l, double t, std::span<const double> x,
                      std::span<const double> u, std::span<const double> v,
                      std::span<double> f) {
    const Matrix& m = w[k * 2 + l];
    for (int d = 0; d < 2; ++d)
      f[d] = a * std::sin(m(d, 0) * x[0] + m(d, 1) * x[1] + t + u[d] - v[d]);
  };
  s.running = [w, a](std::size_t k, std::size_t l, double, std::span<const double> x,
                     std::span<const double> u, std::span<const double> v) {
    const Matrix& m = w[k * 2 + l];
    return a * std::cos(m(0, 0) * x[0] + m(0, 1) * x[1]) * u[0] * v[1];
  };
  s.terminal = [wg](std::size_t k, std::size_t l, std::span<const double> x) {
    return mzdual::dot(wg[k * 2 + l], x);
  };
  s.bounds = {a, lip, lip_g};
  return s;
}

}  // namespace oracle
