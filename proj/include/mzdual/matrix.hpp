#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mzdual {

// Dense row-major matrix of doubles. Small by construction: every matrix in
// this library is a payoff matrix, an LP tableau or a conditional matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix from_row_major(std::size_t rows, std::size_t cols,
                               std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const { return data_; }

  Matrix transposed() const;
  double max_abs() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(double s, const Matrix& m);
Matrix operator+(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace mzdual
