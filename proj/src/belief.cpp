#include "mzdual/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mzdual/errors.hpp"

namespace mzdual {

void check_simplex_point(std::span<const double> p, double tol) {
  if (p.empty()) throw ValidationError("probability vector is empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]))
      throw ValidationError("probability entry " + std::to_string(i) + " is not finite");
    if (p[i] < -tol)
      throw ValidationError("probability entry " + std::to_string(i) + " is negative");
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > tol)
    throw ValidationError("probabilities sum to " + std::to_string(sum) + ", not 1");
}

JointBelief::JointBelief(std::size_t num_k, std::size_t num_l,
                         std::vector<double> probs, double tol)
    : num_k_(num_k), num_l_(num_l), probs_(std::move(probs)) {
  if (num_k_ == 0 || num_l_ == 0)
    throw ValidationError("joint belief needs |K| >= 1 and |L| >= 1");
  if (probs_.size() != num_k_ * num_l_)
    throw ValidationError("joint belief has " + std::to_string(probs_.size()) +
                          " entries, expected " + std::to_string(num_k_ * num_l_));
  check_simplex_point(probs_, tol);
  for (double& v : probs_) v = std::max(v, 0.0);
}

JointBelief JointBelief::uniform(std::size_t num_k, std::size_t num_l) {
  const double w = 1.0 / static_cast<double>(num_k * num_l);
  return JointBelief(num_k, num_l, std::vector<double>(num_k * num_l, w));
}

JointBelief JointBelief::point_mass(std::size_t num_k, std::size_t num_l,
                                    std::size_t k, std::size_t l) {
  std::vector<double> v(num_k * num_l, 0.0);
  v.at(k * num_l + l) = 1.0;
  return JointBelief(num_k, num_l, std::move(v));
}

JointBelief JointBelief::product(std::span<const double> p, std::span<const double> q) {
  std::vector<double> v(p.size() * q.size());
  for (std::size_t k = 0; k < p.size(); ++k)
    for (std::size_t l = 0; l < q.size(); ++l) v[k * q.size() + l] = p[k] * q[l];
  return JointBelief(p.size(), q.size(), std::move(v), 1e-9);
}

namespace {

// rows x cols view of pi where row r, column c reads pi(at(r, c)).
template <typename At>
Decomposition decompose(std::size_t rows, std::size_t cols, At at) {
  Decomposition d;
  d.marginal.assign(rows, 0.0);
  d.conditionals = Matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double mass = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mass += at(r, c);
    d.marginal[r] = mass;
    for (std::size_t c = 0; c < cols; ++c)
      d.conditionals(r, c) =
          mass > 0.0 ? at(r, c) / mass : 1.0 / static_cast<double>(cols);
  }
  return d;
}

void check_stochastic(const Matrix& m, std::size_t rows, std::size_t cols) {
  if (m.rows() != rows || m.cols() != cols)
    throw ValidationError("conditional matrix has shape " + std::to_string(m.rows()) +
                          "x" + std::to_string(m.cols()) + ", expected " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  for (std::size_t r = 0; r < rows; ++r) check_simplex_point(m.row(r), 1e-9);
}

}  // namespace

Decomposition decompose_k(const JointBelief& pi) {
  return decompose(pi.num_k(), pi.num_l(),
                   [&](std::size_t k, std::size_t l) { return pi(k, l); });
}

Decomposition decompose_l(const JointBelief& pi) {
  return decompose(pi.num_l(), pi.num_k(),
                   [&](std::size_t l, std::size_t k) { return pi(k, l); });
}

JointBelief compose_k(std::span<const double> p, const Matrix& q_given_k) {
  check_simplex_point(p, 1e-9);
  check_stochastic(q_given_k, p.size(), q_given_k.cols());
  const std::size_t nl = q_given_k.cols();
  std::vector<double> v(p.size() * nl);
  for (std::size_t k = 0; k < p.size(); ++k)
    for (std::size_t l = 0; l < nl; ++l) v[k * nl + l] = p[k] * q_given_k(k, l);
  return JointBelief(p.size(), nl, std::move(v), 1e-9);
}

JointBelief compose_l(std::span<const double> q, const Matrix& p_given_l) {
  check_simplex_point(q, 1e-9);
  check_stochastic(p_given_l, q.size(), p_given_l.cols());
  const std::size_t nk = p_given_l.cols();
  std::vector<double> v(nk * q.size());
  for (std::size_t k = 0; k < nk; ++k)
    for (std::size_t l = 0; l < q.size(); ++l) v[k * q.size() + l] = q[l] * p_given_l(l, k);
  return JointBelief(nk, q.size(), std::move(v), 1e-9);
}

// ---------------------------------------------------------------------------
// SimplexGrid

std::uint64_t SimplexGrid::count(std::size_t dimension, std::size_t resolution) {
  // C(m + d - 1, d - 1), saturating.
  const std::uint64_t n = resolution + dimension - 1;
  std::uint64_t k = dimension - 1;
  k = std::min<std::uint64_t>(k, n - k);
  long double c = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) c = c * static_cast<long double>(n - k + i) / i;
  if (c > 1.8e19L) return UINT64_MAX;
  return static_cast<std::uint64_t>(std::llround(c));
}

SimplexGrid::SimplexGrid(std::size_t dimension, std::size_t resolution, std::size_t cap)
    : dim_(dimension), m_(resolution) {
  if (dim_ < 1) throw ValidationError("simplex grid dimension must be >= 1");
  if (m_ < 1) throw ValidationError("simplex grid resolution must be >= 1");
  const std::uint64_t n = count(dim_, m_);
  if (n > cap)
    throw SizeLimitError("simplex grid Delta(" + std::to_string(dim_) + ") at m=" +
                         std::to_string(m_) + " has " + std::to_string(n) +
                         " points, cap is " + std::to_string(cap));
  size_ = static_cast<std::size_t>(n);

  compositions_.assign(dim_ + 1, std::vector<std::uint64_t>(m_ + 1, 0));
  compositions_[0][0] = 1;
  for (std::size_t r = 1; r <= dim_; ++r)
    for (std::size_t s = 0; s <= m_; ++s)
      for (std::size_t first = 0; first <= s; ++first)
        compositions_[r][s] += compositions_[r - 1][s - first];

  indices_.reserve(size_ * dim_);
  std::vector<int> a(dim_, 0);
  a[dim_ - 1] = static_cast<int>(m_);
  // Lexicographic successor on compositions of m into dim_ parts.
  while (true) {
    indices_.insert(indices_.end(), a.begin(), a.end());
    if (dim_ == 1) break;
    // Find the rightmost position j < dim_-1 that can be incremented: there
    // must be mass to its right.
    int tail = a[dim_ - 1];
    std::size_t j = dim_ - 1;
    bool found = false;
    while (j > 0) {
      --j;
      if (tail > 0) {
        found = true;
        break;
      }
      tail += a[j];
    }
    if (!found) break;
    a[j] += 1;
    int rest = tail - 1;
    for (std::size_t i = j + 1; i < dim_; ++i) a[i] = 0;
    a[dim_ - 1] = rest;
  }
  if (indices_.size() != size_ * dim_)
    throw Error("simplex grid enumeration produced an unexpected count");
}

std::vector<double> SimplexGrid::point(std::size_t i) const {
  std::vector<double> p(dim_);
  for (std::size_t c = 0; c < dim_; ++c) p[c] = coordinate(i, c);
  return p;
}

std::size_t SimplexGrid::index_of(std::span<const int> a) const {
  if (a.size() != dim_) throw ValidationError("multi-index has wrong dimension");
  std::size_t rank = 0;
  int remaining = static_cast<int>(m_);
  for (std::size_t i = 0; i + 1 < dim_; ++i) {
    const std::size_t parts = dim_ - i - 1;
    if (a[i] < 0 || a[i] > remaining) throw DomainError("multi-index off the grid");
    for (int v = 0; v < a[i]; ++v) rank += compositions_[parts][remaining - v];
    remaining -= a[i];
  }
  if (a[dim_ - 1] != remaining) throw DomainError("multi-index does not sum to m");
  return rank;
}

bool SimplexGrid::is_vertex(std::size_t i) const {
  for (int v : multi_index(i))
    if (v == static_cast<int>(m_)) return true;
  return false;
}

std::vector<std::pair<std::size_t, double>> kuhn_weights(const SimplexGrid& grid,
                                                          std::span<const double> x) {
  const std::size_t d = grid.dimension();
  if (x.size() != d)
    throw DomainError("interpolation point has dimension " + std::to_string(x.size()) +
                      ", grid has " + std::to_string(d));
  double sum = 0.0;
  for (double v : x) {
    if (!(v >= -1e-9)) throw DomainError("interpolation point outside the simplex");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("interpolation point does not sum to 1");
  if (d == 1) return {{0, 1.0}};

  const double m = static_cast<double>(grid.resolution());
  // Cumulative coordinates z_i = m (x_0 + ... + x_i), 0 <= z_0 <= ... <= m.
  std::vector<double> z(d - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < d; ++i) {
    acc += std::max(x[i], 0.0);
    double zi = std::clamp(acc * m, 0.0, m);
    const double r = std::round(zi);
    if (std::abs(zi - r) < 1e-9) zi = r;
    z[i] = i > 0 ? std::max(zi, z[i - 1]) : zi;
  }
  std::vector<int> base(d - 1);
  std::vector<double> frac(d - 1);
  for (std::size_t i = 0; i + 1 < d; ++i) {
    const double f = std::floor(z[i]);
    base[i] = static_cast<int>(f);
    frac[i] = z[i] - f;
  }
  // Kuhn simplex: walk from base adding unit steps in order of decreasing
  // fractional part; ties go to the larger index so the walk stays inside
  // the ordered region z_0 <= ... <= z_{d-2}.
  std::vector<std::size_t> order(d - 1);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a > b;
  });

  std::vector<int> zi(base);
  std::vector<int> a(d);
  auto to_index = [&]() {
    int prev = 0;
    for (std::size_t i = 0; i + 1 < d; ++i) {
      a[i] = zi[i] - prev;
      prev = zi[i];
    }
    a[d - 1] = static_cast<int>(grid.resolution()) - prev;
    return grid.index_of(a);
  };

  std::vector<std::pair<std::size_t, double>> out;
  double prev_frac = 1.0;
  for (std::size_t step = 0; step <= d - 1; ++step) {
    const double next = step < d - 1 ? frac[order[step]] : 0.0;
    const double w = prev_frac - next;
    if (w > 0.0) out.emplace_back(to_index(), w);
    if (step < d - 1) {
      zi[order[step]] += 1;
      prev_frac = next;
    }
  }
  return out;
}

ValueTable::ValueTable(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ValidationError("value table without a grid");
  if (values_.size() != grid_->size())
    throw ValidationError("value table has " + std::to_string(values_.size()) +
                          " values for " + std::to_string(grid_->size()) + " grid points");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw ValidationError("value table entry " + std::to_string(i) + " is not finite");
}

double ValueTable::interpolate(std::span<const double> x) const {
  double v = 0.0;
  for (const auto& [idx, w] : kuhn_weights(*grid_, x)) v += w * values_[idx];
  return v;
}

ProductGrid::ProductGrid(std::vector<GridPtr> factors) : factors_(std::move(factors)) {
  size_ = 1;
  for (const auto& f : factors_) {
    if (!f) throw ValidationError("product grid with a null factor");
    if (size_ > SimplexGrid::kDefaultCap / f->size())
      throw SizeLimitError("product grid exceeds the point cap");
    size_ *= f->size();
  }
}

std::vector<std::size_t> ProductGrid::unflatten(std::size_t i) const {
  std::vector<std::size_t> parts(factors_.size());
  for (std::size_t f = factors_.size(); f-- > 0;) {
    parts[f] = i % factors_[f]->size();
    i /= factors_[f]->size();
  }
  return parts;
}

std::size_t ProductGrid::flatten(std::span<const std::size_t> parts) const {
  std::size_t i = 0;
  for (std::size_t f = 0; f < factors_.size(); ++f) i = i * factors_[f]->size() + parts[f];
  return i;
}

}  // namespace mzdual
