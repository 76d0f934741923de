#include "costate/objective.hpp"

#include <cmath>
#include <string>

namespace costate {

namespace {

// Rows scaled by 1 / max(||row||, eps).
Matrix normalized_rows(const Matrix& Z) {
  Matrix out(Z.rows, Z.cols);
  for (std::size_t i = 0; i < Z.rows; ++i) {
    const double* x = Z.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < Z.cols; ++j) s += x[j] * x[j];
    const double nrm = std::max(std::sqrt(s), kCosineEps);
    for (std::size_t j = 0; j < Z.cols; ++j) out.at(i, j) = x[j] / nrm;
  }
  return out;
}

}  // namespace

Matrix cosine_similarity_matrix(const Matrix& Zi, const Matrix& Zj) {
  if (Zi.cols != Zj.cols)
    throw DimensionError("cosine_similarity_matrix: latent dims " +
                         std::to_string(Zi.cols) + " vs " +
                         std::to_string(Zj.cols));
  const Matrix A = normalized_rows(Zi);
  const Matrix B = normalized_rows(Zj);
  Matrix S(A.rows, B.rows);
  linalg::matmul_bt_acc(A.data.data(), B.data.data(), S.data.data(), A.rows,
                        A.cols, B.rows);
  return S;
}

Matrix target_matrix(const std::vector<int>& yi, const std::vector<int>& yj) {
  for (int v : yi)
    if (v != 1 && v != -1)
      throw DataError("target_matrix: label entries must be +1 or -1");
  for (int v : yj)
    if (v != 1 && v != -1)
      throw DataError("target_matrix: label entries must be +1 or -1");
  Matrix T(yi.size(), yj.size());
  for (std::size_t u = 0; u < yi.size(); ++u)
    for (std::size_t v = 0; v < yj.size(); ++v)
      T.at(u, v) = static_cast<double>(yi[u] * yj[v]);
  return T;
}

double pair_loss(const Matrix& T, const Matrix& S, bool normalize) {
  if (!T.same_shape(S))
    throw DimensionError("pair_loss: target and similarity shapes differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < T.data.size(); ++i) {
    const double d = T.data[i] - S.data[i];
    sum += d * d;
  }
  if (normalize && !T.data.empty())
    sum /= static_cast<double>(T.data.size());
  return sum;
}

ad::Tensor cosine_similarity_on_tape(ad::Tape& tape, const ad::Tensor& Zi,
                                     const ad::Tensor& Zj) {
  if (Zi.cols() != Zj.cols())
    throw DimensionError("cosine_similarity_on_tape: latent dims differ");
  ad::Tensor A = ad::row_l2_normalize(tape, Zi, kCosineEps);
  ad::Tensor B = ad::row_l2_normalize(tape, Zj, kCosineEps);
  return ad::matmul(tape, A, ad::transpose(tape, B));
}

ad::Tensor pair_loss_on_tape(ad::Tape& tape, const ad::Tensor& T,
                             const ad::Tensor& S, bool normalize) {
  if (T.rows() != S.rows() || T.cols() != S.cols())
    throw DimensionError("pair_loss_on_tape: shapes differ");
  ad::Tensor diff = ad::sub(tape, T, S);
  ad::Tensor raw = ad::frobenius_sq_norm(tape, diff);
  if (!normalize) return raw;
  return ad::scalar_mul(tape, raw,
                        1.0 / static_cast<double>(T.rows() * T.cols()));
}

}  // namespace costate
