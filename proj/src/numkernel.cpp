#include "jacprop/numkernel.hpp"

#include <cmath>
#include <string>

#include "jacprop/errors.hpp"

namespace jacprop {

namespace {

std::string shape_str(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                         shape_str(b));
  }
}

void require_same_len(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": length mismatch " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("DenseMatrix: " + std::to_string(data_.size()) +
                         " values for a " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " matrix");
  }
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("DenseMatrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(data));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseVector vec_columns(const DenseMatrix& m) {
  DenseVector out(m.size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out[j * m.rows() + i] = m(i, j);
  }
  return out;
}

DenseVector vec_rows(const DenseMatrix& m) {
  return DenseVector(std::vector<double>(m.span().begin(), m.span().end()));
}

DenseMatrix unvec(const DenseVector& v, std::size_t rows, std::size_t cols) {
  if (v.size() != rows * cols) {
    throw DimensionError("unvec: length " + std::to_string(v.size()) + " cannot fill " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = v[j * rows + i];
  }
  return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_str(a) + " * " + shape_str(b));
  }
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

DenseVector matvec(const DenseMatrix& a, const DenseVector& v) {
  require_same_len(a.cols(), v.size(), "matvec");
  DenseVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), v.span());
  return out;
}

DenseVector transpose_matvec(const DenseMatrix& a, const DenseVector& v) {
  require_same_len(a.rows(), v.size(), "transpose_matvec");
  DenseVector out(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double vi = v[i];
    const auto arow = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += arow[j] * vi;
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  }
  return t;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "add");
  DenseMatrix c = a;
  auto cs = c.span();
  auto bs = b.span();
  for (std::size_t i = 0; i < cs.size(); ++i) cs[i] += bs[i];
  return c;
}

DenseVector add(const DenseVector& a, const DenseVector& b) {
  require_same_len(a.size(), b.size(), "add");
  DenseVector c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

DenseVector subtract(const DenseVector& a, const DenseVector& b) {
  require_same_len(a.size(), b.size(), "subtract");
  DenseVector c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

DenseMatrix scale(const DenseMatrix& m, double s) {
  DenseMatrix c = m;
  for (double& x : c.span()) x *= s;
  return c;
}

DenseVector scale(const DenseVector& v, double s) {
  DenseVector c = v;
  for (double& x : c) x *= s;
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_len(a.size(), b.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

DenseMatrix outer(const DenseVector& u, const DenseVector& v) {
  DenseMatrix m(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
  }
  return m;
}

DenseMatrix diag(const DenseVector& d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.rows() != b.rows()) {
    throw DimensionError("hcat: " + shape_str(a) + " | " + shape_str(b));
  }
  DenseMatrix c(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
  }
  return c;
}

DenseMatrix column_matrix(const DenseVector& v) {
  return DenseMatrix(v.size(), 1, v.values());
}

bool all_finite(std::span<const double> values) {
  for (double x : values) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace jacprop
