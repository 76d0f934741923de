#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "costate/errors.hpp"

namespace costate::ad {

// Dense row-major double tensor with handle semantics: copying a Tensor
// shares the underlying buffer, which is what lets backward rules write
// gradients that the caller observes. Rank is always 2; scalars are 1x1
// and vectors are n x 1 or 1 x n.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols,
                      bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols,
                     std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  std::size_t rows() const { return impl_->rows; }
  std::size_t cols() const { return impl_->cols; }
  std::size_t size() const { return impl_->value.size(); }
  bool is_scalar() const { return size() == 1; }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool v) { impl_->requires_grad = v; }

  std::vector<double>& value() { return impl_->value; }
  const std::vector<double>& value() const { return impl_->value; }

  // Gradient buffer, allocated zero-filled on first access.
  std::vector<double>& grad();
  bool has_grad() const { return !impl_->grad.empty(); }
  void zero_grad();

  double item() const;

  // Stable identity for bookkeeping/tests.
  const void* id() const { return impl_.get(); }

 private:
  struct Impl {
    std::size_t rows = 0, cols = 0;
    std::vector<double> value;
    std::vector<double> grad;  // empty until first touched
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
};

// Wengert list: differentiable operations in execution order. Ops record
// themselves only when some input requires grad, so forward passes over
// frozen parameters leave the tape untouched.
//
// backward() re-zeroes every intermediate (op output) before propagating,
// so leaf gradients accumulate across repeated calls while intermediates
// never leak adjoints between calls. truncate() lets a caller keep a
// shared prefix (an anchor's embedding graph) while discarding per-pair
// suffixes after their backward pass.
class Tape {
 public:
  void record(Tensor output, std::function<void()> rule);
  void backward(const Tensor& loss);

  std::size_t size() const { return ops_.size(); }
  void truncate(std::size_t n);
  void clear();

 private:
  struct Op {
    Tensor output;
    std::function<void()> rule;
  };
  std::vector<Op> ops_;
};

// ---- primitives -----------------------------------------------------------
// Every primitive computes the forward value and, when any input requires
// grad, records its backward rule on the tape. Output requires_grad is the
// OR of the inputs'.

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);  // elementwise
Tensor scalar_mul(Tape& tape, const Tensor& a, double s);
Tensor tanh(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);
Tensor exp(Tape& tape, const Tensor& a);
Tensor concat_rows(Tape& tape, std::span<const Tensor> parts);
Tensor transpose(Tape& tape, const Tensor& a);
Tensor row_softmax(Tape& tape, const Tensor& a);
// Rows scaled by 1 / max(||row||_2, eps); the eps guard keeps cosine
// similarity defined for near-zero embeddings.
Tensor row_l2_normalize(Tape& tape, const Tensor& a, double eps = 1e-12);
Tensor frobenius_sq_norm(Tape& tape, const Tensor& a);  // scalar
Tensor sum_all(Tape& tape, const Tensor& a);            // scalar
Tensor slice_row(Tape& tape, const Tensor& a, std::size_t r);

// Grad-less copy of a tensor's value (a fresh leaf); used for truncated
// backpropagation through time.
Tensor detach(const Tensor& a);

// ---- optimizer ------------------------------------------------------------

void zero_grads(std::span<Tensor> params);

// Adam with bias correction; state (m, v, step count) lives in the object.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::vector<Tensor> params, double lr = 1e-3,
                         double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8);

  void step();
  void zero_grad();
  void scale_grads(double s);
  std::size_t step_count() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

}  // namespace costate::ad
