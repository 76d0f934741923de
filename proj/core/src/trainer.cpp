#include "costate/trainer.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "costate/checkpoint.hpp"
#include "costate/objective.hpp"
#include "costate/rng.hpp"

namespace costate {

void TrainConfig::validate() const {
  if (n_epochs < 1) throw ConfigError("trainer.n_epochs: must be >= 1");
  if (lr <= 0.0) throw ConfigError("trainer.lr: must be > 0");
}

namespace {

bool single_class(const std::vector<int>& y) {
  bool pos = false, neg = false;
  for (int v : y) (v > 0 ? pos : neg) = true;
  return !(pos && neg);
}

ad::Tensor to_const_tensor(const Matrix& m) {
  return ad::Tensor::from(m.rows, m.cols, m.data, false);
}

}  // namespace

TrainTrace train(std::vector<PatientRecord> cohort, const TrainConfig& cfg,
                 ModelParams& params, std::size_t* step_counter) {
  cfg.validate();
  const std::size_t P = cohort.size();
  if (P < 2) throw DataError("train: need at least 2 training patients");

  TrainTrace trace;
  std::vector<bool> degenerate(P);
  for (std::size_t i = 0; i < P; ++i) {
    degenerate[i] = single_class(cohort[i].y);
    if (degenerate[i])
      trace.warnings.push_back("patient " + cohort[i].patient_id +
                               " has single-class labels");
  }

  auto param_list = params.parameters();
  ad::AdamOptimizer opt(param_list, cfg.lr);
  Rng rng(Rng::derive(cfg.seed, 0x7aa1u));

  std::vector<std::size_t> anchor_order(P);
  for (std::size_t i = 0; i < P; ++i) anchor_order[i] = i;

  std::vector<ad::Tensor> targets_cache(P);  // lazily built T columns? no: per-pair

  for (std::size_t epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.shuffle_anchors)
      for (std::size_t i = P - 1; i > 0; --i)
        std::swap(anchor_order[i], anchor_order[rng.bounded(i + 1)]);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;

    for (std::size_t a = 0; a < P; ++a) {
      const std::size_t i = anchor_order[a];
      ad::Tape tape;
      ad::Tensor Xi = to_const_tensor(cohort[i].X);
      ad::Tensor Zi = encode_on_tape(tape, Xi, params, cfg.tbptt_window);
      const std::size_t anchor_mark = tape.size();

      std::vector<std::size_t> partners;
      partners.reserve(P - 1);
      for (std::size_t j = 0; j < P; ++j)
        if (j != i) partners.push_back(j);
      if (cfg.subsample_pairs > 0 && cfg.subsample_pairs < partners.size()) {
        // Prefer partners with both label classes; degenerate pairs still
        // define T but carry less signal.
        std::vector<std::size_t> good, rest;
        for (std::size_t j : partners)
          (degenerate[j] ? rest : good).push_back(j);
        for (std::size_t k = good.size() > 1 ? good.size() - 1 : 0; k > 0; --k)
          std::swap(good[k], good[rng.bounded(k + 1)]);
        while (good.size() < cfg.subsample_pairs && !rest.empty()) {
          good.push_back(rest.back());
          rest.pop_back();
        }
        good.resize(std::min(cfg.subsample_pairs, good.size()));
        std::sort(good.begin(), good.end());
        partners = std::move(good);
      }

      for (std::size_t j : partners) {
        ad::Tensor Xj = to_const_tensor(cohort[j].X);
        ad::Tensor Zj = encode_on_tape(tape, Xj, params, cfg.tbptt_window);
        ad::Tensor S = cosine_similarity_on_tape(tape, Zi, Zj);
        ad::Tensor T = to_const_tensor(target_matrix(cohort[i].y, cohort[j].y));
        ad::Tensor loss = pair_loss_on_tape(tape, T, S, cfg.normalize_loss);
        tape.backward(loss);
        loss_sum += loss.item();
        ++loss_count;
        tape.truncate(anchor_mark);  // keep the anchor graph, drop the pair
      }

      if (!partners.empty()) {
        if (cfg.grad_reduction == GradReduction::kMean)
          opt.scale_grads(1.0 / static_cast<double>(partners.size()));
        opt.step();
      }
      opt.zero_grad();
    }

    const auto t1 = std::chrono::steady_clock::now();
    trace.epoch_mean_loss.push_back(
        loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0);
    trace.epoch_seconds.push_back(
        std::chrono::duration<double>(t1 - t0).count());
  }

  if (step_counter) *step_counter = opt.step_count();
  return trace;
}

std::pair<ModelParams, TrainTrace> train_new(
    const std::vector<PatientRecord>& cohort, const TrainConfig& cfg,
    const EncoderConfig& enc_cfg) {
  Rng init_rng(Rng::derive(cfg.seed, 0x1417u));
  ModelParams params = init_params(enc_cfg, init_rng);
  TrainTrace trace = train(cohort, cfg, params);
  return {std::move(params), std::move(trace)};
}

void save_model(const ModelParams& params, const std::string& path) {
  Checkpoint ckpt;
  ckpt.kind = "collab";
  ckpt.tensors = {{"W_i", params.W_i}, {"W_f", params.W_f},
                  {"W_o", params.W_o}, {"W_g", params.W_g},
                  {"b_i", params.b_i}, {"b_f", params.b_f},
                  {"b_o", params.b_o}, {"b_g", params.b_g}};
  if (params.P.defined()) ckpt.tensors["P"] = params.P;
  const auto& cfg = params.cfg;
  ckpt.hyper = {{"input_dim", static_cast<double>(cfg.input_dim)},
                {"hidden_size", static_cast<double>(cfg.hidden_size)},
                {"latent_size", static_cast<double>(cfg.latent_size)},
                {"use_self_attention", cfg.use_self_attention ? 1.0 : 0.0},
                {"use_cross_attention", cfg.use_cross_attention ? 1.0 : 0.0},
                {"ca_scale_k", cfg.ca_scale_k},
                {"ca_windowed", cfg.ca_windowed ? 1.0 : 0.0},
                {"sa_residual", cfg.sa_residual ? 1.0 : 0.0}};
  save_checkpoint(ckpt, path);
}

ModelParams restore_model(const std::string& path) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.kind != "collab")
    throw DataError("restore_model: " + path + " holds a '" + ckpt.kind +
                    "' checkpoint, expected 'collab'");
  EncoderConfig cfg;
  auto h = [&](const char* key) {
    auto it = ckpt.hyper.find(key);
    if (it == ckpt.hyper.end())
      throw DataError("restore_model: missing hyperparameter " +
                      std::string(key));
    return it->second;
  };
  cfg.input_dim = static_cast<std::size_t>(h("input_dim"));
  cfg.hidden_size = static_cast<std::size_t>(h("hidden_size"));
  cfg.latent_size = static_cast<std::size_t>(h("latent_size"));
  cfg.use_self_attention = h("use_self_attention") != 0.0;
  cfg.use_cross_attention = h("use_cross_attention") != 0.0;
  cfg.ca_scale_k = h("ca_scale_k");
  cfg.ca_windowed = h("ca_windowed") != 0.0;
  cfg.sa_residual = h("sa_residual") != 0.0;

  const std::size_t H = cfg.hidden_size, D = cfg.input_dim,
                    L = cfg.latent_size;
  auto take = [&](const char* name, std::size_t r, std::size_t c) {
    auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end())
      throw DataError("restore_model: missing tensor " + std::string(name));
    if (it->second.rows() != r || it->second.cols() != c)
      throw DataError("restore_model: tensor " + std::string(name) +
                      " has shape " + std::to_string(it->second.rows()) + "x" +
                      std::to_string(it->second.cols()) + ", expected " +
                      std::to_string(r) + "x" + std::to_string(c));
    return it->second;
  };
  ModelParams params;
  params.cfg = cfg;
  params.W_i = take("W_i", H, D + H);
  params.W_f = take("W_f", H, D + H);
  params.W_o = take("W_o", H, D + H);
  params.W_g = take("W_g", H, D + H);
  params.b_i = take("b_i", H, 1);
  params.b_f = take("b_f", H, 1);
  params.b_o = take("b_o", H, 1);
  params.b_g = take("b_g", H, 1);
  if (L != H) params.P = take("P", L, H);
  return params;
}

std::string train_trace_to_jsonl(const TrainTrace& trace) {
  std::string out;
  for (std::size_t k = 0; k < trace.epoch_mean_loss.size(); ++k) {
    nlohmann::ordered_json j;
    j["epoch"] = k + 1;
    j["mean_loss"] = trace.epoch_mean_loss[k];
    j["seconds"] = trace.epoch_seconds[k];
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace costate
