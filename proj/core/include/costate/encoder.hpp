#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "costate/matrix.hpp"
#include "costate/rng.hpp"
#include "costate/tensor.hpp"

namespace costate {

struct EncoderConfig {
  std::size_t input_dim = 6;
  std::size_t hidden_size = 32;
  std::size_t latent_size = 32;
  bool use_self_attention = true;
  bool use_cross_attention = false;
  double ca_scale_k = 60.0;   // fixed scaling constant, independent of N
  bool ca_windowed = false;   // attend within K-sample channel windows
  bool sa_residual = false;   // z' = z + attention(z) instead of replace
};

// All trainable weights of the embedding model. Gates take the concatenated
// [x_t; h_{t-1}] column, so each W_* is H x (D+H). The projection P (L x H)
// exists only when latent_size != hidden_size; otherwise the hidden state is
// the embedding directly.
struct ModelParams {
  EncoderConfig cfg;
  ad::Tensor W_i, W_f, W_o, W_g;  // H x (D+H)
  ad::Tensor b_i, b_f, b_o, b_g;  // H x 1
  ad::Tensor P;                   // L x H, undefined when L == H

  std::vector<ad::Tensor> parameters() const;
};

// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases except the forget
// gate bias at +1.
ModelParams init_params(const EncoderConfig& cfg, Rng& rng);

struct EmbeddingSequence {
  std::string patient_id;
  Matrix Z;  // N x L
};

// Standard LSTM recurrence with h_0 = c_0 = 0; returns all hidden states
// stacked as N x H.
ad::Tensor lstm_forward(ad::Tape& tape, const ad::Tensor& X,
                        const ModelParams& params,
                        std::size_t tbptt_window = 0);

// z'_i = sum_j softmax_j(z_i . z_j / sqrt(L)) z_j over the sequence.
ad::Tensor self_attention(ad::Tape& tape, const ad::Tensor& Z);

// Channels attend over channels: columns of X mixed by softmax of their
// inner products scaled by sqrt(K), K fixed (60 by default) regardless of
// record length.
ad::Tensor cross_channel_attention(ad::Tape& tape, const ad::Tensor& X,
                                   double scale_k, bool windowed = false);

// Full pipeline: [cross-channel attention] -> LSTM -> projection ->
// [self-attention]. Differentiable end to end when params require grad.
ad::Tensor encode_on_tape(ad::Tape& tape, const ad::Tensor& X,
                          const ModelParams& params,
                          std::size_t tbptt_window = 0);

// Inference-path encode: plain matrices in and out. Read-only on params;
// safe to call concurrently for different patients.
EmbeddingSequence encode(const Matrix& X, const ModelParams& params,
                         const std::string& patient_id = "");

}  // namespace costate
