#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mzdual/matrix_game.hpp"

namespace mzdual {

using Point = std::vector<double>;

// How the finite control lists are played. kPure scans pure control pairs and
// takes max-min / min-max; kMixed lets both players randomize over the lists,
// which makes the Hamiltonian the value of a matrix game.
enum class ControlMode { kPure, kMixed };

// f^{kl}(t, x, u, v) written into `out` (size = state dimension).
using TypedDynamics = std::function<void(std::size_t k, std::size_t l, double t,
                                         std::span<const double> x,
                                         std::span<const double> u,
                                         std::span<const double> v,
                                         std::span<double> out)>;
using TypedRunning = std::function<double(std::size_t k, std::size_t l, double t,
                                          std::span<const double> x,
                                          std::span<const double> u,
                                          std::span<const double> v)>;
using TypedTerminal =
    std::function<double(std::size_t k, std::size_t l, std::span<const double> x)>;
using Dynamics = std::function<void(double t, std::span<const double> x,
                                    std::span<const double> u,
                                    std::span<const double> v, std::span<double> out)>;

// Constants declared by whoever supplies the game. `bound` bounds every
// component of the dynamics and the running payoff; `lipschitz` bounds their
// Lipschitz quotient in (t, x), with |x - y| Euclidean and |t - s| added;
// `terminal_lipschitz` is the same for the terminal payoffs.
struct DeclaredBounds {
  double bound = 1.0;
  double lipschitz = 0.0;
  double terminal_lipschitz = 1.0;
};

// Type-dependent game in Bolza form.
struct DifferentialGameSpec {
  std::size_t num_k = 1, num_l = 1;
  std::size_t state_dim = 0;
  double t0 = 0.0;
  std::vector<Point> x0;  // one initial state per type pair, index k*|L|+l
  std::vector<Point> controls_u, controls_v;
  TypedDynamics dynamics;
  TypedRunning running;
  TypedTerminal terminal;
  DeclaredBounds bounds;
  ControlMode mode = ControlMode::kPure;
};

// Common initial state and dynamics, no running payoff.
struct MayerSpec {
  std::size_t num_k = 1, num_l = 1;
  std::size_t state_dim = 0;
  double t0 = 0.0;
  Point z;
  std::vector<Point> controls_u, controls_v;
  Dynamics dynamics;
  TypedTerminal terminal;
  DeclaredBounds bounds;
  ControlMode mode = ControlMode::kPure;
};

// Structural checks: sizes, nonempty control lists, callables present.
void validate(const DifferentialGameSpec& spec);
void validate(const MayerSpec& spec);

// Samples `samples` random points (t uniform on [t0, 1], x in a box of
// radius 1 + bound around the initial states, random control pairs) and
// throws DeclaredBoundError when the declared bound or Lipschitz constant of
// the dynamics (and running payoff) is exceeded. Returns the largest observed
// component and Lipschitz quotient.
struct SampledConstants {
  double bound = 0.0;
  double lipschitz = 0.0;
};
SampledConstants check_declared_bounds(const DifferentialGameSpec& spec,
                                       std::size_t samples = 1000,
                                       std::uint64_t seed = 1);
SampledConstants check_declared_bounds(const MayerSpec& spec,
                                       std::size_t samples = 1000,
                                       std::uint64_t seed = 1);

// State (y^{kl}, x^{kl})_{k,l} in (R x R^n)^{K x L}, block b = k*|L|+l at
// offset b*(1+n). F^{kl} = (running^{kl}, f^{kl}) per block and
// G^{kl} = y^{kl} + g^{kl}(x^{kl}).
MayerSpec reduce_to_mayer(const DifferentialGameSpec& spec);

// Piecewise-constant controls: indices into the control lists, one per step.
struct ControlPath {
  std::vector<std::size_t> u, v;
};

// Number of Euler steps of size dt covering [t0, 1]; dt must divide the
// horizon (to 1e-9 relative).
std::size_t step_count(double t0, double dt);

// Explicit Euler trajectories and left-endpoint quadrature of the running
// payoff. Payoffs are returned per type pair, index k*|L|+l.
std::vector<double> bolza_payoffs(const DifferentialGameSpec& spec,
                                  const ControlPath& path, double dt);
std::vector<double> mayer_payoffs(const MayerSpec& spec, const ControlPath& path,
                                  double dt);

// Constant C with |Euler payoff - exact payoff| <= C dt for any control path
// of a game with state dimension n, from the declared constants:
// C = (1 + sqrt(n) B)(1 + L)^2 (1 + Lg) e^L.
double euler_error_constant(const DeclaredBounds& bounds, std::size_t state_dim);

// ---------------------------------------------------------------------------
// Hamiltonians.

struct HamiltonianPair {
  double lower = 0.0;  // max_u min_v <phi, xi>
  double upper = 0.0;  // min_v max_u <phi, xi>
  double gap() const { return upper - lower; }
};

inline constexpr double kIsaacsTol = 1e-9;

// Exhaustive scan over the control lists (pure mode) or the value of the
// matrix game <phi(t, x, u_i, v_j), xi> (mixed mode, lower == upper).
HamiltonianPair hamiltonian(const MayerSpec& spec, double t, std::span<const double> x,
                            std::span<const double> xi);

// The common Hamiltonian; throws IsaacsViolation when the gap exceeds `tol`.
double isaacs_hamiltonian(const MayerSpec& spec, double t, std::span<const double> x,
                          std::span<const double> xi, double tol = kIsaacsTol);

// Largest Isaacs gap over `samples` random (t, x, xi) in the state box of
// `radius` around z. Does not throw.
double isaacs_probe(const MayerSpec& spec, double radius, std::size_t samples,
                    std::uint64_t seed);

// max |H(t,x,xi) - H(s,y,xi)| / (|xi| (|t-s| + |x-y|)) over random pairs in
// the box of `radius` around z (the upper Hamiltonian is used). Throws
// DeclaredBoundError when it exceeds 1.01 times the declared constant.
double hamiltonian_regularity_probe(const MayerSpec& spec, double radius,
                                    std::size_t pairs = 10'000, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Built-in games.

// The repeated game as a differential game: the state accumulates the
// payoff of every type pair, x' = (G^{kl}(u, v))_{k,l}, terminal g^{kl}(x) =
// x^{kl}, controls are the pure actions played in mixed mode.
MayerSpec repeated_game_embedding(const MatrixGameFamily& family);
// The same game in Bolza form with an empty original state: running payoff
// G^{kl}(u, v), no terminal payoff.
DifferentialGameSpec repeated_game_bolza(const MatrixGameFamily& family);

// x' = A x + B u + C v + c with terminal g^{kl}(x) = w^{kl} . x + d^{kl}.
struct LinearDynamics {
  Matrix a, b, c;
  std::vector<double> drift;
  std::vector<std::vector<double>> terminal_weights;  // per type pair
  std::vector<double> terminal_offsets;               // per type pair
};
MayerSpec linear_game(std::size_t num_k, std::size_t num_l, const LinearDynamics& dyn,
                      Point z, std::vector<Point> controls_u,
                      std::vector<Point> controls_v, DeclaredBounds bounds,
                      ControlMode mode = ControlMode::kPure);

// x' = u (.) v componentwise (u, v, x of equal dimension), terminal sum of
// coordinates. The standard game without a saddle point in pure controls.
MayerSpec bilinear_game(std::size_t dim, std::vector<Point> controls_u,
                        std::vector<Point> controls_v, DeclaredBounds bounds);

}  // namespace mzdual
