#include "costate/matrix.hpp"

namespace costate::linalg {

void matmul_acc(const double* a, const double* b, double* c, std::size_t m,
                std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void matmul_bt_acc(const double* a, const double* b, double* c, std::size_t m,
                   std::size_t k, std::size_t n) {
  // c[i][j] += dot(a_row_i, b_row_j); unit stride on both operands.
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

void matmul_at_acc(const double* a, const double* b, double* c, std::size_t m,
                   std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    const double* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * bi[j];
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw DimensionError("matmul: inner dimensions disagree");
  Matrix c(a.rows, b.cols);
  matmul_acc(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols,
             b.cols);
  return c;
}

}  // namespace costate::linalg
