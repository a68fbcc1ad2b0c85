#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "mzdual/matrix.hpp"

namespace mzdual {

inline constexpr double kProbabilityTol = 1e-12;

// Throws ValidationError unless `p` is a probability vector within `tol`.
void check_simplex_point(std::span<const double> p, double tol = kProbabilityTol);

// A point of Delta(K x L), stored row-major: index k * |L| + l.
class JointBelief {
 public:
  JointBelief(std::size_t num_k, std::size_t num_l, std::vector<double> probs,
              double tol = kProbabilityTol);

  static JointBelief uniform(std::size_t num_k, std::size_t num_l);
  static JointBelief point_mass(std::size_t num_k, std::size_t num_l,
                                std::size_t k, std::size_t l);
  static JointBelief product(std::span<const double> p, std::span<const double> q);

  std::size_t num_k() const { return num_k_; }
  std::size_t num_l() const { return num_l_; }
  double operator()(std::size_t k, std::size_t l) const {
    return probs_[k * num_l_ + l];
  }
  std::span<const double> probs() const { return probs_; }

 private:
  std::size_t num_k_, num_l_;
  std::vector<double> probs_;
};

// pi = marginal (x) conditionals. For decompose_k the marginal lives on K and
// conditionals(k, l) = P(l | k); decompose_l gives the marginal on L and
// conditionals(l, k) = P(k | l). A row whose marginal mass is zero is the
// uniform distribution.
struct Decomposition {
  std::vector<double> marginal;
  Matrix conditionals;
};

Decomposition decompose_k(const JointBelief& pi);
Decomposition decompose_l(const JointBelief& pi);

// pi(k, l) = p(k) Q(l | k).
JointBelief compose_k(std::span<const double> p, const Matrix& q_given_k);
// pi(k, l) = q(l) P(k | l).
JointBelief compose_l(std::span<const double> q, const Matrix& p_given_l);

// All points of Delta(d) whose coordinates are multiples of 1/m, enumerated
// lexicographically by integer multi-index (a_0, ..., a_{d-1}), sum a = m.
class SimplexGrid {
 public:
  static constexpr std::size_t kDefaultCap = 10'000'000;

  SimplexGrid(std::size_t dimension, std::size_t resolution,
              std::size_t cap = kDefaultCap);

  static std::uint64_t count(std::size_t dimension, std::size_t resolution);

  std::size_t dimension() const { return dim_; }
  std::size_t resolution() const { return m_; }
  std::size_t size() const { return size_; }

  std::span<const int> multi_index(std::size_t i) const {
    return {indices_.data() + i * dim_, dim_};
  }
  std::vector<double> point(std::size_t i) const;
  double coordinate(std::size_t i, std::size_t c) const {
    return static_cast<double>(indices_[i * dim_ + c]) / static_cast<double>(m_);
  }
  // Inverse of multi_index(); the multi-index must sum to the resolution.
  std::size_t index_of(std::span<const int> multi_index) const;

  bool is_vertex(std::size_t i) const;

  friend bool operator==(const SimplexGrid& a, const SimplexGrid& b) {
    return a.dim_ == b.dim_ && a.m_ == b.m_;
  }

 private:
  std::size_t dim_, m_, size_;
  std::vector<int> indices_;
  // compositions_[r][s] = number of ways to write s as r nonnegative parts.
  std::vector<std::vector<std::uint64_t>> compositions_;
};

using GridPtr = std::shared_ptr<const SimplexGrid>;

// Barycentric weights of `x` on the Kuhn triangulation of the grid: pairs of
// (grid index, weight) with positive weights summing to one. Exact at grid
// points. Throws DomainError when x is farther than 1e-9 from the simplex.
std::vector<std::pair<std::size_t, double>> kuhn_weights(const SimplexGrid& grid,
                                                          std::span<const double> x);

// Immutable function sampled on a simplex grid.
class ValueTable {
 public:
  ValueTable(GridPtr grid, std::vector<double> values);

  const SimplexGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  double interpolate(std::span<const double> x) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

// Samples f at every grid point.
template <typename F>
ValueTable tabulate(GridPtr grid, F&& f) {
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) v[i] = f(grid->point(i));
  return ValueTable(std::move(grid), std::move(v));
}

// Cartesian product of simplex grids, enumerated with the last factor varying
// fastest.
class ProductGrid {
 public:
  explicit ProductGrid(std::vector<GridPtr> factors);

  std::size_t size() const { return size_; }
  std::size_t num_factors() const { return factors_.size(); }
  const SimplexGrid& factor(std::size_t f) const { return *factors_[f]; }
  // Per-factor grid indices of flat index i.
  std::vector<std::size_t> unflatten(std::size_t i) const;
  std::size_t flatten(std::span<const std::size_t> parts) const;

 private:
  std::vector<GridPtr> factors_;
  std::size_t size_;
};

}  // namespace mzdual
