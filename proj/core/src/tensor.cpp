#include "costate/tensor.hpp"

#include <cmath>
#include <string>

#include "costate/matrix.hpp"

namespace costate::ad {

namespace {

[[noreturn]] void dim_fail(const char* prim, const Tensor& a) {
  throw DimensionError(std::string(prim) + ": bad shape " +
                       std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()));
}

void require_same_shape(const char* prim, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(prim) + ": shapes " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + " differ");
}

}  // namespace

// ---- Tensor ----------------------------------------------------------------

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->rows = rows;
  t.impl_->cols = cols;
  t.impl_->value.assign(rows * cols, 0.0);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::from(std::size_t rows, std::size_t cols,
                    std::vector<double> values, bool requires_grad) {
  if (values.size() != rows * cols)
    throw DimensionError("Tensor::from: value count does not match shape");
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->rows = rows;
  t.impl_->cols = cols;
  t.impl_->value = std::move(values);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from(1, 1, {v}, requires_grad);
}

std::vector<double>& Tensor::grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->value.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (!impl_->grad.empty()) impl_->grad.assign(impl_->value.size(), 0.0);
}

double Tensor::item() const {
  if (!is_scalar()) throw DimensionError("Tensor::item: not a scalar");
  return impl_->value[0];
}

// ---- Tape ------------------------------------------------------------------

void Tape::record(Tensor output, std::function<void()> rule) {
  ops_.push_back(Op{std::move(output), std::move(rule)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || !loss.is_scalar())
    throw DimensionError("Tape::backward: loss must be a defined scalar");
  // Reset intermediates so earlier backward calls cannot leak adjoints
  // into this one; leaves are never op outputs and keep accumulating.
  for (auto& op : ops_) op.output.zero_grad();
  Tensor seed = loss;
  seed.grad()[0] = 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) it->rule();
}

void Tape::truncate(std::size_t n) {
  if (n < ops_.size()) ops_.resize(n);
}

void Tape::clear() { ops_.clear(); }

// ---- primitives ------------------------------------------------------------

namespace {

inline bool track(const Tensor& a) { return a.requires_grad(); }

void maybe_record(Tape& tape, Tensor out, bool tracked,
                  std::function<void()> rule) {
  if (tracked) {
    out.set_requires_grad(true);
    tape.record(std::move(out), std::move(rule));
  }
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner dimensions " +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor c = Tensor::zeros(m, n);
  linalg::matmul_acc(a.value().data(), b.value().data(), c.value().data(), m,
                     k, n);
  maybe_record(tape, c, track(a) || track(b), [a, b, c, m, k, n]() mutable {
    const auto& gc = c.grad();
    if (a.requires_grad())
      linalg::matmul_bt_acc(gc.data(), b.value().data(), a.grad().data(), m,
                            n, k);
    if (b.requires_grad())
      linalg::matmul_at_acc(a.value().data(), gc.data(), b.grad().data(), m,
                            k, n);
  });
  return c;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Tensor c = Tensor::zeros(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i)
    c.value()[i] = a.value()[i] + b.value()[i];
  maybe_record(tape, c, track(a) || track(b), [a, b, c]() mutable {
    const auto& gc = c.grad();
    if (a.requires_grad()) {
      auto& ga = a.grad();
      for (std::size_t i = 0; i < gc.size(); ++i) ga[i] += gc[i];
    }
    if (b.requires_grad()) {
      auto& gb = b.grad();
      for (std::size_t i = 0; i < gc.size(); ++i) gb[i] += gc[i];
    }
  });
  return c;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  Tensor c = Tensor::zeros(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i)
    c.value()[i] = a.value()[i] - b.value()[i];
  maybe_record(tape, c, track(a) || track(b), [a, b, c]() mutable {
    const auto& gc = c.grad();
    if (a.requires_grad()) {
      auto& ga = a.grad();
      for (std::size_t i = 0; i < gc.size(); ++i) ga[i] += gc[i];
    }
    if (b.requires_grad()) {
      auto& gb = b.grad();
      for (std::size_t i = 0; i < gc.size(); ++i) gb[i] -= gc[i];
    }
  });
  return c;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Tensor c = Tensor::zeros(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i)
    c.value()[i] = a.value()[i] * b.value()[i];
  maybe_record(tape, c, track(a) || track(b), [a, b, c]() mutable {
    const auto& gc = c.grad();
    if (a.requires_grad()) {
      auto& ga = a.grad();
      for (std::size_t i = 0; i < gc.size(); ++i)
        ga[i] += gc[i] * b.value()[i];
    }
    if (b.requires_grad()) {
      auto& gb = b.grad();
      for (std::size_t i = 0; i < gc.size(); ++i)
        gb[i] += gc[i] * a.value()[i];
    }
  });
  return c;
}

Tensor scalar_mul(Tape& tape, const Tensor& a, double s) {
  Tensor c = Tensor::zeros(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i) c.value()[i] = a.value()[i] * s;
  maybe_record(tape, c, track(a), [a, c, s]() mutable {
    auto& ga = a.grad();
    const auto& gc = c.grad();
    for (std::size_t i = 0; i < gc.size(); ++i) ga[i] += s * gc[i];
  });
  return c;
}

Tensor tanh(Tape& tape, const Tensor& a) {
  Tensor c = Tensor::zeros(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i)
    c.value()[i] = std::tanh(a.value()[i]);
  maybe_record(tape, c, track(a), [a, c]() mutable {
    auto& ga = a.grad();
    const auto& gc = c.grad();
    for (std::size_t i = 0; i < gc.size(); ++i) {
      const double y = c.value()[i];
      ga[i] += gc[i] * (1.0 - y * y);
    }
  });
  return c;
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
  Tensor c = Tensor::zeros(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double x = a.value()[i];
    c.value()[i] =
        x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                 : std::exp(x) / (1.0 + std::exp(x));
  }
  maybe_record(tape, c, track(a), [a, c]() mutable {
    auto& ga = a.grad();
    const auto& gc = c.grad();
    for (std::size_t i = 0; i < gc.size(); ++i) {
      const double y = c.value()[i];
      ga[i] += gc[i] * y * (1.0 - y);
    }
  });
  return c;
}

Tensor exp(Tape& tape, const Tensor& a) {
  Tensor c = Tensor::zeros(a.rows(), a.cols());
  for (std::size_t i = 0; i < c.size(); ++i)
    c.value()[i] = std::exp(a.value()[i]);
  maybe_record(tape, c, track(a), [a, c]() mutable {
    auto& ga = a.grad();
    const auto& gc = c.grad();
    for (std::size_t i = 0; i < gc.size(); ++i)
      ga[i] += gc[i] * c.value()[i];
  });
  return c;
}

Tensor concat_rows(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no parts");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  bool tracked = false;
  for (const auto& p : parts) {
    if (p.cols() != cols)
      throw DimensionError("concat_rows: column counts differ");
    rows += p.rows();
    tracked = tracked || track(p);
  }
  Tensor c = Tensor::zeros(rows, cols);
  std::size_t r0 = 0;
  for (const auto& p : parts) {
    std::copy(p.value().begin(), p.value().end(),
              c.value().begin() + r0 * cols);
    r0 += p.rows();
  }
  std::vector<Tensor> captured(parts.begin(), parts.end());
  maybe_record(tape, c, tracked, [captured, c, cols]() mutable {
    const auto& gc = c.grad();
    std::size_t r0 = 0;
    for (auto& p : captured) {
      if (p.requires_grad()) {
        auto& gp = p.grad();
        for (std::size_t i = 0; i < gp.size(); ++i)
          gp[i] += gc[r0 * cols + i];
      }
      r0 += p.rows();
    }
  });
  return c;
}

Tensor transpose(Tape& tape, const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor c = Tensor::zeros(n, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      c.value()[j * m + i] = a.value()[i * n + j];
  maybe_record(tape, c, track(a), [a, c, m, n]() mutable {
    auto& ga = a.grad();
    const auto& gc = c.grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += gc[j * m + i];
  });
  return c;
}

Tensor row_softmax(Tape& tape, const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  if (n == 0) dim_fail("row_softmax", a);
  Tensor c = Tensor::zeros(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = a.value().data() + i * n;
    double* y = c.value().data() + i * n;
    double mx = x[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = std::exp(x[j] - mx);
      sum += y[j];
    }
    for (std::size_t j = 0; j < n; ++j) y[j] /= sum;
  }
  maybe_record(tape, c, track(a), [a, c, m, n]() mutable {
    auto& ga = a.grad();
    const auto& gc = c.grad();
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = c.value().data() + i * n;
      const double* gy = gc.data() + i * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += gy[j] * y[j];
      for (std::size_t j = 0; j < n; ++j)
        ga[i * n + j] += y[j] * (gy[j] - dot);
    }
  });
  return c;
}

Tensor row_l2_normalize(Tape& tape, const Tensor& a, double eps) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor c = Tensor::zeros(m, n);
  std::vector<double> norms(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = a.value().data() + i * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += x[j] * x[j];
    const double nrm = std::max(std::sqrt(s), eps);
    norms[i] = nrm;
    for (std::size_t j = 0; j < n; ++j) c.value()[i * n + j] = x[j] / nrm;
  }
  maybe_record(tape, c, track(a), [a, c, norms, m, n, eps]() mutable {
    auto& ga = a.grad();
    const auto& gc = c.grad();
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = c.value().data() + i * n;
      const double* gy = gc.data() + i * n;
      const double* x = a.value().data() + i * n;
      double xn = 0.0;
      for (std::size_t j = 0; j < n; ++j) xn += x[j] * x[j];
      if (std::sqrt(xn) > eps) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += gy[j] * y[j];
        for (std::size_t j = 0; j < n; ++j)
          ga[i * n + j] += (gy[j] - dot * y[j]) / norms[i];
      } else {
        // Below the guard the map is x / eps, a constant scale.
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += gy[j] / eps;
      }
    }
  });
  return c;
}

Tensor frobenius_sq_norm(Tape& tape, const Tensor& a) {
  double s = 0.0;
  for (double v : a.value()) s += v * v;
  Tensor c = Tensor::scalar(s);
  maybe_record(tape, c, track(a), [a, c]() mutable {
    auto& ga = a.grad();
    const double g = c.grad()[0];
    for (std::size_t i = 0; i < ga.size(); ++i)
      ga[i] += 2.0 * g * a.value()[i];
  });
  return c;
}

Tensor sum_all(Tape& tape, const Tensor& a) {
  double s = 0.0;
  for (double v : a.value()) s += v;
  Tensor c = Tensor::scalar(s);
  maybe_record(tape, c, track(a), [a, c]() mutable {
    auto& ga = a.grad();
    const double g = c.grad()[0];
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
  return c;
}

Tensor slice_row(Tape& tape, const Tensor& a, std::size_t r) {
  if (r >= a.rows()) throw DimensionError("slice_row: row out of range");
  const std::size_t n = a.cols();
  Tensor c = Tensor::zeros(1, n);
  std::copy(a.value().begin() + r * n, a.value().begin() + (r + 1) * n,
            c.value().begin());
  maybe_record(tape, c, track(a), [a, c, r, n]() mutable {
    auto& ga = a.grad();
    const auto& gc = c.grad();
    for (std::size_t j = 0; j < n; ++j) ga[r * n + j] += gc[j];
  });
  return c;
}

Tensor detach(const Tensor& a) {
  return Tensor::from(a.rows(), a.cols(), a.value(), false);
}

// ---- optimizer -------------------------------------------------------------

void zero_grads(std::span<Tensor> params) {
  for (auto& p : params) p.zero_grad();
}

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, double lr,
                             double beta1, double beta2, double eps)
    : params_(std::move(params)),
      lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void AdamOptimizer::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    auto& g = p.grad();
    auto& m = m_[k];
    auto& v = v_[k];
    auto& w = p.value();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void AdamOptimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void AdamOptimizer::scale_grads(double s) {
  for (auto& p : params_) {
    auto& g = p.grad();
    for (auto& x : g) x *= s;
  }
}

}  // namespace costate::ad
