#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mzdual/belief.hpp"

namespace mzdual {

// ---------------------------------------------------------------------------
// Conjugates. Both are discrete extrema over the grid nodes, which is exact
// for the piecewise-affine interpolant of the table.

struct ConjugateResult {
  double value = 0.0;
  std::size_t argmax = 0;  // grid index attaining the extremum (first one)
};

// phi#(zeta) = max_p phi(p) - <zeta, p>.
ConjugateResult upper_conjugate(const ValueTable& phi, std::span<const double> zeta);
// phi_flat(eta) = min_q phi(q) + <q, eta>.
ConjugateResult lower_conjugate(const ValueTable& phi, std::span<const double> eta);

// ---------------------------------------------------------------------------
// Envelopes.

// Convex-combination weights (grid index, lambda) certifying an envelope value.
using Certificate = std::vector<std::pair<std::size_t, double>>;

struct EnvelopeResult {
  ValueTable envelope;
  std::vector<Certificate> certificates;
};

// max { sum lambda_r f_r : sum lambda_r x_r = x_point, lambda in simplex } over
// every grid generator r (optionally skipping `excluded`). Returns nullopt-like
// NaN when no combination reproduces the point (only possible when the point
// itself is excluded and is a vertex).
double cav_at(const SimplexGrid& grid, std::span<const double> values,
              std::size_t point, Certificate* certificate = nullptr,
              std::size_t excluded = static_cast<std::size_t>(-1));

EnvelopeResult cav(const ValueTable& f);
EnvelopeResult vex(const ValueTable& f);

// max_i (cav f - f)_i; zero (up to rounding) iff f is concave on the grid.
double concavity_defect(const ValueTable& f);

// ---------------------------------------------------------------------------
// Supergradients and extreme points.

// A supergradient x of the concave table f at grid point `point`:
// f(p) + <x, p' - p> >= f(p') for every grid p'. Among all supergradients the
// one maximizing the normalized margin is returned, canonicalized to zero
// mean. Throws NotConcaveError when no supergradient exists within `tol`.
std::vector<double> superdifferential(const ValueTable& f, std::size_t point,
                                      double tol = 1e-9);
// Mirror for convex f: f(q) + <y, q' - q> <= f(q') for every grid q'.
std::vector<double> subdifferential(const ValueTable& f, std::size_t point,
                                    double tol = 1e-9);

inline constexpr double kExtremeTol = 1e-7;

// Grid points p whose value is strictly above (by more than `tol`) the
// concave hull of every other node evaluated at p.
std::vector<std::size_t> extreme_points(const ValueTable& f, double tol = kExtremeTol);

// ---------------------------------------------------------------------------
// Fibers of Delta(K x L).

struct JointShape {
  std::size_t num_k = 1;
  std::size_t num_l = 1;
};

enum class FiberSide { kK, kL };

// Precomputed geometry of the fibers through every point of a Delta(K x L)
// grid. For side K, the fiber through pi = p (x) Q is p' -> p' (x) Q over a
// Delta(K) grid of the same resolution; for side L it is q' -> q' (x) P.
// Every joint grid point belongs to exactly one fiber (grouped by the exact
// rational conditional matrix) and sits on that fiber's marginal grid.
class FiberPlan {
 public:
  struct Fiber {
    Matrix conditionals;  // Q (side K, |K| x |L|) or P (side L, |L| x |K|)
    // stencils[i]: Kuhn weights on the joint grid of the fiber point at
    // marginal grid index i.
    std::vector<std::vector<std::pair<std::size_t, double>>> stencils;
    // (joint grid index, marginal grid index) of every joint point on it.
    std::vector<std::pair<std::size_t, std::size_t>> members;
    bool aligned = false;  // every fiber point is a joint grid node
  };

  FiberPlan(GridPtr joint, JointShape shape, FiberSide side);

  FiberSide side() const { return side_; }
  JointShape shape() const { return shape_; }
  const SimplexGrid& joint_grid() const { return *joint_; }
  const GridPtr& joint_grid_ptr() const { return joint_; }
  const SimplexGrid& marginal_grid() const { return *marginal_; }
  const GridPtr& marginal_grid_ptr() const { return marginal_; }
  std::span<const Fiber> fibers() const { return fibers_; }

  // Joint belief (row-major k * |L| + l) of the fiber point at marginal index i.
  std::vector<double> fiber_point(const Fiber& fiber, std::size_t i) const;
  // Interpolated joint table restricted to the fiber.
  std::vector<double> restrict(const Fiber& fiber, std::span<const double> joint_values) const;

 private:
  GridPtr joint_, marginal_;
  JointShape shape_;
  FiberSide side_;
  std::vector<Fiber> fibers_;
};

// Cav_K (side K plan) or Vex_L (side L plan) of a joint table: at every joint
// point pi the envelope of its fiber function, read back at pi's marginal.
ValueTable cav_k(const ValueTable& w, const FiberPlan& plan);
ValueTable vex_l(const ValueTable& w, const FiberPlan& plan);
// Convenience overloads building the plan on the fly.
ValueTable cav_k(const ValueTable& w, JointShape shape);
ValueTable vex_l(const ValueTable& w, JointShape shape);

// Variant evaluating the fiber function directly instead of interpolating a
// table: `f` receives the joint belief of each fiber point.
using JointFunction = std::function<double(std::span<const double>)>;
ValueTable cav_k(const JointFunction& f, const FiberPlan& plan);
ValueTable vex_l(const JointFunction& f, const FiberPlan& plan);

// Largest violation of fiber concavity (side K) / convexity (side L) over
// all fibers and all marginal grid points, with the index of the worst fiber
// and the marginal index of the worst point on it.
struct FiberDefect {
  double defect = 0.0;
  std::size_t fiber = 0;
  std::size_t marginal_index = 0;
};
FiberDefect fiber_defect(const ValueTable& w, const FiberPlan& plan);

}  // namespace mzdual
