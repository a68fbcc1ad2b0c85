#include <cmath>
#include <random>

#include "doctest.h"
#include "mzdual/mz.hpp"
#include "oracles.hpp"

using namespace mzdual;

namespace {

MatrixGameFamily aumann_maschler() {
  return MatrixGameFamily(2, 1, {Matrix{{1.0, 0.0}, {0.0, 0.0}}, Matrix{{0.0, 0.0}, {0.0, 1.0}}});
}

MatrixGameFamily random_family(std::mt19937_64& rng, std::size_t nk, std::size_t nl,
                               std::size_t ni = 2, std::size_t nj = 2) {
  std::vector<Matrix> m;
  for (std::size_t b = 0; b < nk * nl; ++b) m.push_back(oracle::random_matrix(rng, ni, nj));
  return MatrixGameFamily(nk, nl, std::move(m));
}

// Mertens-Zamir system for independent types on a product grid
// p = (a/n, 1-a/n), q = (b/n, 1-b/n), 2x2 actions, solved with closed-form
// 2x2 values and brute-force chord envelopes.
struct IndependentMZ {
  std::size_t n;
  std::vector<std::vector<double>> w;  // w[a][b]

  static std::vector<double> chord(const std::vector<double>& f, double sign) {
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      double best = sign * f[i];
      for (std::size_t a = 0; a <= i; ++a)
        for (std::size_t b = i; b < f.size(); ++b) {
          if (a == b) continue;
          const double t = double(i - a) / double(b - a);
          best = std::max(best, sign * ((1 - t) * f[a] + t * f[b]));
        }
      out[i] = sign * best;
    }
    return out;
  }

  IndependentMZ(const MatrixGameFamily& fam, std::size_t n_) : n(n_) {
    std::vector<std::vector<double>> u(n + 1, std::vector<double>(n + 1));
    for (std::size_t a = 0; a <= n; ++a)
      for (std::size_t b = 0; b <= n; ++b) {
        const double p[2] = {double(a) / n, 1 - double(a) / n};
        const double q[2] = {double(b) / n, 1 - double(b) / n};
        double e[4] = {0, 0, 0, 0};
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            for (int c = 0; c < 4; ++c) e[c] += p[k] * q[l] * fam.payoff(k, l)(c / 2, c % 2);
        u[a][b] = oracle::solve_2x2(e[0], e[1], e[2], e[3]).value;
      }
    auto iterate = [&](double start) {
      std::vector<std::vector<double>> v(n + 1, std::vector<double>(n + 1, start));
      for (int it = 0; it < 5000; ++it) {
        double move = 0;
        auto next = v;
        for (std::size_t b = 0; b <= n; ++b) {
          std::vector<double> f(n + 1);
          for (std::size_t a = 0; a <= n; ++a) f[a] = std::min(u[a][b], v[a][b]);
          const auto c = chord(f, 1.0);
          for (std::size_t a = 0; a <= n; ++a) next[a][b] = c[a];
        }
        for (std::size_t a = 0; a <= n; ++a) {
          std::vector<double> f(n + 1);
          for (std::size_t b = 0; b <= n; ++b) f[b] = std::max(u[a][b], next[a][b]);
          const auto c = chord(f, -1.0);
          for (std::size_t b = 0; b <= n; ++b) next[a][b] = c[b];
        }
        for (std::size_t a = 0; a <= n; ++a)
          for (std::size_t b = 0; b <= n; ++b) move = std::max(move, std::abs(next[a][b] - v[a][b]));
        v = next;
        if (move < 1e-12) break;
      }
      return v;
    };
    const auto up = iterate(fam.max_abs());
    const auto lo = iterate(-fam.max_abs());
    w = up;
    for (std::size_t a = 0; a <= n; ++a)
      for (std::size_t b = 0; b <= n; ++b) {
        REQUIRE(std::abs(up[a][b] - lo[a][b]) < 1e-8);
        w[a][b] = 0.5 * (up[a][b] + lo[a][b]);
      }
  }
};

}  // namespace

TEST_CASE("complete information is a constant fixed point") {
  const MatrixGameFamily fam(1, 1, {Matrix{{3.0, -1.0}, {-2.0, 4.0}}});
  const auto s = solve_mz(fam, {.grid_m = 4});
  REQUIRE(s.w.size() == 1);
  CHECK(s.w[0] == doctest::Approx(1.0).epsilon(1e-10));
  const MZSystem sys(fam, 4);
  const auto same = sys.step(sys.constant(1.0));
  CHECK(same[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("steps from the brackets move inward") {
  std::mt19937_64 rng(7);
  const auto fam = random_family(rng, 2, 2);
  const MZSystem sys(fam, 6);
  const double m = fam.max_abs();
  const auto down = sys.step(sys.constant(m));
  const auto up = sys.step(sys.constant(-m));
  for (std::size_t i = 0; i < down.size(); ++i) {
    CHECK(down[i] <= m + 1e-12);
    CHECK(up[i] >= -m - 1e-12);
  }
}

TEST_CASE("Aumann-Maschler pair: W is p(1-p)") {
  const auto fam = aumann_maschler();
  const auto s = solve_mz(fam, {.grid_m = 200});
  double worst = 0.0;
  for (std::size_t i = 0; i < s.w.size(); ++i) {
    const double p = s.w.grid().coordinate(i, 0);
    worst = std::max(worst, std::abs(s.w[i] - p * (1 - p)));
  }
  CHECK(worst <= 2e-3);
  const auto report = verify_mz(s.w, fam);
  for (const auto& c : report.checks) {
    INFO(c.name, " ", c.value, " ", c.witness);
    CHECK(c.passed);
  }
}

TEST_CASE("one-sided information reduces to cav u") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t nk = 2 + trial % 2;
    const auto fam = random_family(rng, nk, 1, 3, 2);
    const MZSystem sys(fam, nk == 2 ? 20 : 8);
    const auto s = solve_mz(sys);
    const auto ref = cav(sys.u()).envelope;
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(s.w[i] == doctest::Approx(ref[i]).epsilon(1e-9));
  }
}

TEST_CASE("dependent types: brackets close and degenerate beliefs give val G") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    const auto fam = random_family(rng, 2, 2);
    const MZSystem sys(fam, 8);
    const auto s = solve_mz(sys);
    CHECK(s.gap <= 1e-6);
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t l = 0; l < 2; ++l) {
        std::vector<int> idx(4, 0);
        idx[k * 2 + l] = 8;
        CHECK(s.w[sys.grid()->index_of(idx)] ==
              doctest::Approx(matrix_game_value(fam.payoff(k, l))).epsilon(1e-8));
      }
    for (std::size_t i = 0; i < s.w.size(); ++i) {
      CHECK(s.w[i] <= fam.max_abs() + 1e-12);
      CHECK(s.w[i] >= -fam.max_abs() - 1e-12);
      CHECK(s.lower[i] <= s.upper[i] + 1e-12);
    }
    // Off-grid fibers make the equation residuals an interpolation-sized
    // quantity rather than a rounding-sized one.
    CHECK(s.cav_residual <= 2e-2);
    CHECK(s.vex_residual <= 2e-2);
  }
}

TEST_CASE("bracket sequences are monotone") {
  std::mt19937_64 rng(19);
  const auto fam = random_family(rng, 2, 2);
  const MZSystem sys(fam, 6);
  auto hi = sys.constant(fam.max_abs());
  auto lo = sys.constant(-fam.max_abs());
  for (int it = 0; it < 30; ++it) {
    const auto nhi = sys.step(hi);
    const auto nlo = sys.step(lo);
    for (std::size_t i = 0; i < hi.size(); ++i) {
      CHECK(nhi[i] <= hi[i] + 1e-10);
      CHECK(nlo[i] >= lo[i] - 1e-10);
      CHECK(nlo[i] <= nhi[i] + 1e-10);
    }
    hi = nhi;
    lo = nlo;
  }
}

TEST_CASE("independent types agree with a product-grid solve") {
  std::mt19937_64 rng(23);
  const auto fam = random_family(rng, 2, 2);
  const std::size_t m = 16;
  const auto s = solve_mz(fam, {.grid_m = m});
  const IndependentMZ ref(fam, m);
  double worst = 0.0;
  std::size_t compared = 0;
  for (std::size_t a = 0; a <= m; ++a)
    for (std::size_t b = 0; b <= m; ++b) {
      // p (x) q lies on the joint grid when every product is a multiple of 1/m.
      const std::size_t pa[2] = {a, m - a}, qb[2] = {b, m - b};
      std::vector<int> idx(4);
      bool on_grid = true;
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          if ((pa[k] * qb[l]) % m != 0) on_grid = false;
          idx[k * 2 + l] = static_cast<int>(pa[k] * qb[l] / m);
        }
      if (!on_grid) continue;
      ++compared;
      worst = std::max(worst, std::abs(s.w[s.w.grid().index_of(idx)] - ref.w[a][b]));
    }
  CHECK(compared >= 20);
  CHECK(worst <= 5e-2);
}

TEST_CASE("verification catches wrong tables") {
  // u = |p1 - p2| is convex in p, so W = u breaks K-concavity.
  const MatrixGameFamily convex_u(2, 1, {Matrix{{1.0}, {-1.0}}, Matrix{{-1.0}, {1.0}}});
  const MZSystem sys(convex_u, 10);
  const auto r = verify_mz(sys.u(), sys);
  const Check* c = r.find("k_concavity");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->passed);
  CHECK(c->witness.find("pi = ") == 0);

  const auto am = aumann_maschler();
  const MZSystem am_sys(am, 10);
  const auto z = verify_mz(am_sys.constant(0.0), am_sys);
  CHECK_FALSE(z.find("vex_equation")->passed);
  CHECK_FALSE(z.passed());
}
