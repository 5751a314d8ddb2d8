#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetnids {

// Dense row-major matrix of 64-bit reals. All numeric state in the
// project (features, parameters, activations, gradients) lives in these.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major, rows*cols entries

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative dimensions");
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  bool empty() const { return rows == 0 || cols == 0; }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline bool all_finite(const Matrix& m) {
  for (double v : m.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("shape mismatch: " + what);
}

// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  require_shape(a.cols == b.rows, "matmul inner dims");
  Matrix c(a.rows, b.cols, 0.0);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

// C = A^T * B  (A is k x m, B is k x n, C is m x n)
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  require_shape(a.rows == b.rows, "matmul_tn shared dim");
  Matrix c(a.cols, b.cols, 0.0);
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (int i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = c.row(i);
      for (int j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

// C = A * B^T  (A is m x k, B is n x k, C is m x n)
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require_shape(a.cols == b.cols, "matmul_nt shared dim");
  Matrix c(a.rows, b.rows, 0.0);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = b.row(j);
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
      crow[j] = s;
    }
  }
  return c;
}

// Column sums of A as a 1 x cols matrix.
inline Matrix colsum(const Matrix& a) {
  Matrix s(1, a.cols, 0.0);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    for (int j = 0; j < a.cols; ++j) s.data[static_cast<std::size_t>(j)] += arow[j];
  }
  return s;
}

inline double squared_distance(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

}  // namespace hetnids
