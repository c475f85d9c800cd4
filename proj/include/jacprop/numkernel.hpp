#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace jacprop {

/// Owned vector of doubles.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  explicit DenseVector(std::vector<double> data) : data_(std::move(data)) {}
  DenseVector(std::initializer_list<double> init) : data_(init) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> data_;
};

/// Row-major matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws DimensionError unless data.size() == rows * cols.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Vectorization. vec_columns stacks columns (element (i, j) lands at j * rows + i);
// vec_rows stacks rows, i.e. vec_columns of the transpose.
DenseVector vec_columns(const DenseMatrix& m);
DenseVector vec_rows(const DenseMatrix& m);
/// Inverse of vec_columns.
DenseMatrix unvec(const DenseVector& v, std::size_t rows, std::size_t cols);

// All products accumulate over the inner index in increasing order.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseVector matvec(const DenseMatrix& a, const DenseVector& v);
/// a^T v without forming the transpose.
DenseVector transpose_matvec(const DenseMatrix& a, const DenseVector& v);
DenseMatrix transpose(const DenseMatrix& m);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseVector add(const DenseVector& a, const DenseVector& b);
DenseVector subtract(const DenseVector& a, const DenseVector& b);
DenseMatrix scale(const DenseMatrix& m, double s);
DenseVector scale(const DenseVector& v, double s);
double dot(std::span<const double> a, std::span<const double> b);
DenseMatrix outer(const DenseVector& u, const DenseVector& v);
DenseMatrix diag(const DenseVector& d);
/// Horizontal concatenation [a | b]; row counts must match.
DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix column_matrix(const DenseVector& v);

bool all_finite(std::span<const double> values);

}  // namespace jacprop
