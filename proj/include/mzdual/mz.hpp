#pragma once

#include <cstddef>
#include <string>

#include "mzdual/belief.hpp"
#include "mzdual/convex.hpp"
#include "mzdual/errors.hpp"
#include "mzdual/matrix_game.hpp"
#include "mzdual/report.hpp"

namespace mzdual {

struct MZConfig {
  std::size_t grid_m = 50;
  double tol = 1e-8;          // sup-norm move that stops each bracket
  std::size_t max_iter = 10'000;
  double gap_tol = 1e-6;      // required final ||w+ - w-||
};

// The system w = Cav_K min{u, w}, w = Vex_L max{u, w} on a Delta(K x L) grid,
// with the non-revealing value and both fiber plans precomputed.
class MZSystem {
 public:
  MZSystem(const MatrixGameFamily& family, std::size_t grid_m);

  const MatrixGameFamily& family() const { return family_; }
  JointShape shape() const { return {family_.num_k(), family_.num_l()}; }
  const GridPtr& grid() const { return grid_; }
  const ValueTable& u() const { return u_; }
  const FiberPlan& k_plan() const { return k_plan_; }
  const FiberPlan& l_plan() const { return l_plan_; }

  // Cav_K min{u, w}.
  ValueTable cav_half(const ValueTable& w) const;
  // Vex_L max{u, w}.
  ValueTable vex_half(const ValueTable& w) const;
  // vex_half(cav_half(w)).
  ValueTable step(const ValueTable& w) const;

  // Sup-norm defects of the two equations.
  double cav_residual(const ValueTable& w) const;
  double vex_residual(const ValueTable& w) const;

  ValueTable constant(double c) const;

 private:
  MatrixGameFamily family_;
  GridPtr grid_;
  ValueTable u_;
  FiberPlan k_plan_, l_plan_;
};

// Table of u on the joint grid.
ValueTable nonrevealing_table(const MatrixGameFamily& family, GridPtr joint_grid);

// One sweep on the grid of `w`.
ValueTable mz_step(const ValueTable& w, const MatrixGameFamily& family);

struct MZSolution {
  ValueTable w;
  ValueTable upper;  // final iterate from +max|G|
  ValueTable lower;  // final iterate from -max|G|
  double cav_residual = 0.0;
  double vex_residual = 0.0;
  std::size_t upper_iterations = 0;
  std::size_t lower_iterations = 0;
  double gap = 0.0;
};

// Raised when either bracket exhausts its budget or the two brackets settle
// more than gap_tol apart. Carries both last iterates.
class MZConvergenceError : public ConvergenceError {
 public:
  MZConvergenceError(const std::string& what, ValueTable upper, ValueTable lower, double gap)
      : ConvergenceError(what), upper_(std::move(upper)), lower_(std::move(lower)), gap_(gap) {}
  const ValueTable& upper() const { return upper_; }
  const ValueTable& lower() const { return lower_; }
  double gap() const { return gap_; }

 private:
  ValueTable upper_, lower_;
  double gap_;
};

MZSolution solve_mz(const MZSystem& system, const MZConfig& config = {});
MZSolution solve_mz(const MatrixGameFamily& family, const MZConfig& config = {});

struct MZVerifyOptions {
  double shape_tol = 1e-8;     // fiber concavity / convexity defect
  double equation_tol = 1e-6;  // residual of each equation
  double extreme_tol = 1e-6;   // W <= u (resp. >=) at fiber extreme points
};

// Checks "k_concavity", "l_convexity", "cav_equation", "vex_equation",
// "extreme_upper" and "extreme_lower".
VerificationReport verify_mz(const ValueTable& w, const MZSystem& system,
                             const MZVerifyOptions& options = {});
VerificationReport verify_mz(const ValueTable& w, const MatrixGameFamily& family,
                             const MZVerifyOptions& options = {});

// "(0.25, 0.75, 0, 0)"-style rendering of a point, for witnesses.
std::string format_point(std::span<const double> x);

}  // namespace mzdual
