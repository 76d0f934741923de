#pragma once

#include <vector>

#include "costate/matrix.hpp"
#include "costate/tensor.hpp"

namespace costate {

inline constexpr double kCosineEps = 1e-12;

// S[u][v] = z_u . z_v / (max(|z_u|, eps) * max(|z_v|, eps)); entries land
// in [-1, 1] up to rounding.
Matrix cosine_similarity_matrix(const Matrix& Zi, const Matrix& Zj);

// T = y_i y_j^T; entries must be exactly +-1.
Matrix target_matrix(const std::vector<int>& yi, const std::vector<int>& yj);

// Sum of squared element differences, divided by the element count when
// normalize is set. Normalization keeps the loss scale independent of
// record length; the minimizer is unchanged for any fixed pair.
double pair_loss(const Matrix& T, const Matrix& S, bool normalize = true);

// Differentiable path used during training: same math built from autodiff
// primitives, with T entering as a constant.
ad::Tensor cosine_similarity_on_tape(ad::Tape& tape, const ad::Tensor& Zi,
                                     const ad::Tensor& Zj);
ad::Tensor pair_loss_on_tape(ad::Tape& tape, const ad::Tensor& T,
                             const ad::Tensor& S, bool normalize = true);

}  // namespace costate
