#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mzdual/belief.hpp"
#include "mzdual/convex.hpp"
#include "mzdual/differential.hpp"
#include "mzdual/report.hpp"

namespace mzdual {

// Uniform lattice on an axis-aligned box, first coordinate varying slowest.
class StateLattice {
 public:
  StateLattice() = default;
  StateLattice(std::vector<double> lower, std::vector<std::size_t> counts, double dx);

  std::size_t dimension() const { return counts_.size(); }
  std::size_t size() const { return size_; }
  double dx() const { return dx_; }
  std::span<const std::size_t> counts() const { return counts_; }
  std::span<const double> lower() const { return lower_; }

  double coordinate(std::size_t node, std::size_t d) const;
  Point point(std::size_t node) const;
  std::size_t stride(std::size_t d) const { return strides_[d]; }
  std::size_t component(std::size_t node, std::size_t d) const {
    return node / strides_[d] % counts_[d];
  }
  // Neighbour one step up (+1) or down (-1) along d, if inside the box.
  std::optional<std::size_t> neighbor(std::size_t node, std::size_t d, int dir) const;
  // Every coordinate at least `depth` steps away from the faces of the box.
  bool interior(std::size_t node, std::size_t depth = 1) const;
  // Lattice node at `x`; throws DomainError unless x is a node within 1e-9 dx.
  std::size_t index_of(std::span<const double> x) const;

  friend bool operator==(const StateLattice& a, const StateLattice& b) {
    return a.lower_ == b.lower_ && a.counts_ == b.counts_ && a.dx_ == b.dx_;
  }

 private:
  std::vector<double> lower_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> strides_;
  double dx_ = 1.0;
  std::size_t size_ = 0;
};

// Box of radius |z|_inf + bound around z (trajectories started at z stay in
// it up to time 1), rounded outward to a multiple of dx.
StateLattice state_box(const MayerSpec& spec, double dx);

// V(t_i, x_s, pi_b) for every time step, lattice node and belief grid point.
class ValueGrid {
 public:
  ValueGrid(std::vector<double> times, StateLattice lattice, GridPtr beliefs,
            JointShape shape, std::vector<double> diffusion);

  std::span<const double> times() const { return times_; }
  std::size_t num_times() const { return times_.size(); }
  double dt() const { return times_.size() > 1 ? times_[1] - times_[0] : 0.0; }
  const StateLattice& lattice() const { return lattice_; }
  const SimplexGrid& beliefs() const { return *beliefs_; }
  const GridPtr& beliefs_ptr() const { return beliefs_; }
  JointShape shape() const { return shape_; }
  // Lax-Friedrichs coefficient of every state dimension.
  std::span<const double> diffusion() const { return diffusion_; }

  double& at(std::size_t i, std::size_t s, std::size_t b) {
    return values_[(i * lattice_.size() + s) * beliefs_->size() + b];
  }
  double at(std::size_t i, std::size_t s, std::size_t b) const {
    return values_[(i * lattice_.size() + s) * beliefs_->size() + b];
  }
  // Belief table of time step i at node s.
  std::span<const double> table(std::size_t i, std::size_t s) const {
    return {values_.data() + (i * lattice_.size() + s) * beliefs_->size(), beliefs_->size()};
  }
  std::span<double> table(std::size_t i, std::size_t s) {
    return {values_.data() + (i * lattice_.size() + s) * beliefs_->size(), beliefs_->size()};
  }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  // Kuhn interpolation in the belief at a lattice node.
  double value(std::size_t i, std::span<const double> x, std::span<const double> pi) const;

 private:
  std::vector<double> times_;
  StateLattice lattice_;
  GridPtr beliefs_;
  JointShape shape_;
  std::vector<double> diffusion_;
  std::vector<double> values_;
};

// Which belief projection comes first after each Hamilton-Jacobi step.
enum class SplittingOrder { kCavThenVex, kVexThenCav };

struct HjConfig {
  double dt = 1.0 / 50.0;
  double dx = 0.25;
  std::size_t belief_m = 50;
  SplittingOrder order = SplittingOrder::kCavThenVex;
  double isaacs_tol = kIsaacsTol;
  std::size_t probe_samples = 256;
  std::size_t bound_samples = 1000;
  std::uint64_t seed = 1;
  std::size_t node_cap = 50'000'000;  // times x states x beliefs
  std::size_t threads = 0;            // 0: hardware concurrency
};

// a_d = max |phi_d| over every control pair at the lattice nodes (or 4096
// random nodes on large lattices) and times t0, (t0 + 1)/2, 1.
std::vector<double> artificial_diffusion(const MayerSpec& spec, const StateLattice& lattice,
                                         std::uint64_t seed = 1);

// Lax-Friedrichs numerical Hamiltonian
//   H(t, x, (D- + D+)/2) + sum_d a_d/2 (D+_d - D-_d)
// (upper Hamiltonian; the caller is responsible for the Isaacs condition).
double numerical_hamiltonian(const MayerSpec& spec, double t, std::span<const double> x,
                             std::span<const double> dminus, std::span<const double> dplus,
                             std::span<const double> diffusion);

// Backward sweep from V(1, x, pi) = sum pi^{kl} g^{kl}(x): every step is a
// monotone Lax-Friedrichs update followed by Cav_K and Vex_L on the belief
// grid at each lattice node. Throws CflViolation unless
// dt * sum_d a_d <= dx, IsaacsViolation when the Hamiltonians differ,
// DeclaredBoundError when sampling contradicts the declared constants and
// SizeLimitError beyond node_cap.
ValueGrid solve_value(const MayerSpec& spec, const HjConfig& config = {});

// One backward step from slice i + 1 to slice i of `grid` (used by the
// solver; exposed for monotonicity checks).
void hj_step(const MayerSpec& spec, ValueGrid& grid, std::size_t i, const FiberPlan* k_plan,
             const FiberPlan* l_plan, SplittingOrder order, double isaacs_tol,
             std::size_t threads = 1);

// ---------------------------------------------------------------------------
// Verification.

struct DualCheckOptions {
  double residual_scale = 1e-2;  // residual tolerance = scale * (dt + dx)
  double shape_tol = 1e-8;
  double terminal_tol = 1e-10;   // relative to 1 + max |g|
  std::size_t random_draws = 32;
  std::uint64_t seed = 1;
};

// Checks (names in the report):
//   k_concavity, l_convexity   fiber defects of every non-terminal slice
//   terminal                   |V(1, x, pi) - sum pi g(x)|
//   k_subsolution              discrete residual of (t, x) -> V_K#(t, x, zeta, Q)
//   l_supersolution            discrete residual of (t, x) -> V_Lb(t, x, P, eta)
// The residuals are evaluated at interior lattice nodes for (zeta, Q) taken
// as the canonical supergradient at every belief grid point of the initial
// slice plus `random_draws` random pairs (same for (P, eta)).
VerificationReport check_dual_solution(const ValueGrid& grid, const MayerSpec& spec,
                                       const DualCheckOptions& options = {});

enum class ComparisonStatus { kHolds, kHypothesisViolated, kConclusionViolated };

std::string_view to_string(ComparisonStatus status);

struct ComparisonReport {
  ComparisonStatus status = ComparisonStatus::kHolds;
  // w1 shape and super-solution checks, w2 shape and sub-solution checks,
  // and terminal_order = max (w2 - w1) on the terminal slice.
  VerificationReport hypotheses;
  double slack = 0.0;
  double worst = 0.0;  // max (w2 - w1) over every node
  std::string witness;
};

// w1 >= w2 - slack on every node, slack = the two residual tolerances
// integrated over the horizon. Throws ValidationError unless the grids share
// times, lattice and belief grid.
ComparisonReport compare(const ValueGrid& w1, const ValueGrid& w2, const MayerSpec& spec,
                         const DualCheckOptions& options = {});

}  // namespace mzdual
