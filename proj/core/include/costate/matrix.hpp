#pragma once

#include <cstddef>
#include <vector>

#include "costate/errors.hpp"

namespace costate {

// Plain row-major double matrix for the non-differentiable paths
// (preprocessing, inference, metrics, t-SNE). The autodiff engine has its
// own tensor type; this one is value-semantic and dependency-free.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

namespace linalg {

// c[m x n] += a[m x k] * b[k x n], cache-friendly (i,k,j) order.
void matmul_acc(const double* a, const double* b, double* c, std::size_t m,
                std::size_t k, std::size_t n);

// c[m x n] += a[m x k] * b[n x k]^T  (i.e. a * transpose(b)).
void matmul_bt_acc(const double* a, const double* b, double* c, std::size_t m,
                   std::size_t k, std::size_t n);

// c[k x n] += a[m x k]^T * b[m x n].
void matmul_at_acc(const double* a, const double* b, double* c, std::size_t m,
                   std::size_t k, std::size_t n);

Matrix matmul(const Matrix& a, const Matrix& b);

}  // namespace linalg

}  // namespace costate
