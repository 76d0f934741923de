#include "costate/encoder.hpp"

#include <array>
#include <cmath>

namespace costate {

std::vector<ad::Tensor> ModelParams::parameters() const {
  std::vector<ad::Tensor> out{W_i, W_f, W_o, W_g, b_i, b_f, b_o, b_g};
  if (P.defined()) out.push_back(P);
  return out;
}

ModelParams init_params(const EncoderConfig& cfg, Rng& rng) {
  const std::size_t H = cfg.hidden_size, D = cfg.input_dim,
                    L = cfg.latent_size;
  if (H == 0 || D == 0 || L == 0)
    throw ConfigError("encoder: hidden_size, latent_size and input_dim must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(H));
  auto uniform_mat = [&](std::size_t r, std::size_t c) {
    std::vector<double> v(r * c);
    for (auto& x : v) x = rng.uniform(-bound, bound);
    return ad::Tensor::from(r, c, std::move(v), true);
  };
  ModelParams p;
  p.cfg = cfg;
  p.W_i = uniform_mat(H, D + H);
  p.W_f = uniform_mat(H, D + H);
  p.W_o = uniform_mat(H, D + H);
  p.W_g = uniform_mat(H, D + H);
  p.b_i = ad::Tensor::zeros(H, 1, true);
  p.b_f = ad::Tensor::from(H, 1, std::vector<double>(H, 1.0), true);
  p.b_o = ad::Tensor::zeros(H, 1, true);
  p.b_g = ad::Tensor::zeros(H, 1, true);
  if (L != H) p.P = uniform_mat(L, H);
  return p;
}

ad::Tensor lstm_forward(ad::Tape& tape, const ad::Tensor& X,
                        const ModelParams& params, std::size_t tbptt_window) {
  const std::size_t N = X.rows(), D = X.cols();
  const std::size_t H = params.cfg.hidden_size;
  if (D != params.cfg.input_dim)
    throw DimensionError("lstm_forward: input has " + std::to_string(D) +
                         " channels, model expects " +
                         std::to_string(params.cfg.input_dim));
  if (N == 0) throw DimensionError("lstm_forward: empty sequence");

  ad::Tensor h = ad::Tensor::zeros(H, 1);
  ad::Tensor c = ad::Tensor::zeros(H, 1);
  std::vector<ad::Tensor> rows;
  rows.reserve(N);
  for (std::size_t t = 0; t < N; ++t) {
    if (tbptt_window > 0 && t > 0 && t % tbptt_window == 0) {
      h = ad::detach(h);
      c = ad::detach(c);
    }
    ad::Tensor xt = ad::transpose(tape, ad::slice_row(tape, X, t));  // D x 1
    std::array<ad::Tensor, 2> parts{xt, h};
    ad::Tensor xh = ad::concat_rows(tape, parts);  // (D+H) x 1
    ad::Tensor gi =
        ad::sigmoid(tape, ad::add(tape, ad::matmul(tape, params.W_i, xh), params.b_i));
    ad::Tensor gf =
        ad::sigmoid(tape, ad::add(tape, ad::matmul(tape, params.W_f, xh), params.b_f));
    ad::Tensor go =
        ad::sigmoid(tape, ad::add(tape, ad::matmul(tape, params.W_o, xh), params.b_o));
    ad::Tensor gg =
        ad::tanh(tape, ad::add(tape, ad::matmul(tape, params.W_g, xh), params.b_g));
    c = ad::add(tape, ad::mul(tape, gf, c), ad::mul(tape, gi, gg));
    h = ad::mul(tape, go, ad::tanh(tape, c));
    rows.push_back(ad::transpose(tape, h));  // 1 x H
  }
  return ad::concat_rows(tape, rows);  // N x H
}

ad::Tensor self_attention(ad::Tape& tape, const ad::Tensor& Z) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(Z.cols()));
  ad::Tensor scores =
      ad::scalar_mul(tape, ad::matmul(tape, Z, ad::transpose(tape, Z)), scale);
  ad::Tensor weights = ad::row_softmax(tape, scores);
  return ad::matmul(tape, weights, Z);
}

namespace {

// One attention mix across channels for a block of rows: columns of X
// attend over each other with scores c_i . c_j / sqrt(K).
ad::Tensor ca_block(ad::Tape& tape, const ad::Tensor& X, double scale_k) {
  const double scale = 1.0 / std::sqrt(scale_k);
  ad::Tensor Xt = ad::transpose(tape, X);  // D x N
  ad::Tensor scores =
      ad::scalar_mul(tape, ad::matmul(tape, Xt, ad::transpose(tape, Xt)), scale);
  ad::Tensor weights = ad::row_softmax(tape, scores);  // D x D
  // X'[t][i] = sum_j W[i][j] X[t][j]  =>  X' = X * W^T
  return ad::matmul(tape, X, ad::transpose(tape, weights));
}

}  // namespace

ad::Tensor cross_channel_attention(ad::Tape& tape, const ad::Tensor& X,
                                   double scale_k, bool windowed) {
  if (X.cols() == 0) throw DimensionError("cross_channel_attention: no channels");
  if (scale_k <= 0.0)
    throw ConfigError("cross_channel_attention: scale K must be positive");
  if (!windowed) return ca_block(tape, X, scale_k);

  // Windowed variant: attention computed independently within consecutive
  // K-sample chunks (last chunk may be shorter), then re-stacked.
  const std::size_t w = static_cast<std::size_t>(scale_k);
  const std::size_t N = X.rows();
  std::vector<ad::Tensor> blocks;
  for (std::size_t start = 0; start < N; start += w) {
    const std::size_t len = std::min(w, N - start);
    std::vector<ad::Tensor> rows;
    rows.reserve(len);
    for (std::size_t t = 0; t < len; ++t)
      rows.push_back(ad::slice_row(tape, X, start + t));
    ad::Tensor chunk = ad::concat_rows(tape, rows);
    blocks.push_back(ca_block(tape, chunk, scale_k));
  }
  return ad::concat_rows(tape, blocks);
}

ad::Tensor encode_on_tape(ad::Tape& tape, const ad::Tensor& X,
                          const ModelParams& params,
                          std::size_t tbptt_window) {
  ad::Tensor input = X;
  if (params.cfg.use_cross_attention)
    input = cross_channel_attention(tape, input, params.cfg.ca_scale_k,
                                    params.cfg.ca_windowed);
  ad::Tensor Z = lstm_forward(tape, input, params, tbptt_window);
  if (params.P.defined())
    Z = ad::matmul(tape, Z, ad::transpose(tape, params.P));
  if (params.cfg.use_self_attention) {
    ad::Tensor attended = self_attention(tape, Z);
    Z = params.cfg.sa_residual ? ad::add(tape, Z, attended) : attended;
  }
  return Z;
}

EmbeddingSequence encode(const Matrix& X, const ModelParams& params,
                         const std::string& patient_id) {
  ad::Tape tape;
  ad::Tensor Xt = ad::Tensor::from(X.rows, X.cols, X.data, false);
  ad::Tensor Z = encode_on_tape(tape, Xt, params);
  EmbeddingSequence out;
  out.patient_id = patient_id;
  out.Z.rows = Z.rows();
  out.Z.cols = Z.cols();
  out.Z.data = Z.value();
  return out;
}

}  // namespace costate
