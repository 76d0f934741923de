#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "costate/encoder.hpp"
#include "costate/preprocess.hpp"

namespace costate {

enum class GradReduction { kMean, kSum };

struct TrainConfig {
  std::size_t n_epochs = 30;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool normalize_loss = true;
  GradReduction grad_reduction = GradReduction::kMean;
  bool shuffle_anchors = false;
  std::size_t tbptt_window = 0;     // 0 = full backpropagation through time
  std::size_t subsample_pairs = 0;  // 0 = every partner, per the algorithm

  void validate() const;
};

struct TrainTrace {
  std::vector<double> epoch_mean_loss;
  std::vector<double> epoch_seconds;
  std::vector<std::string> warnings;
};

// Collaborative training: per epoch, each anchor patient is compared
// against every other training patient; pair gradients accumulate on the
// anchor's tape and one optimizer step is taken per anchor, after the
// inner loop. Deterministic for a fixed cohort, config and seed.
TrainTrace train(std::vector<PatientRecord> cohort, const TrainConfig& cfg,
                 ModelParams& params, std::size_t* step_counter = nullptr);

// Convenience wrapper that also initializes parameters from the seed.
std::pair<ModelParams, TrainTrace> train_new(
    const std::vector<PatientRecord>& cohort, const TrainConfig& cfg,
    const EncoderConfig& enc_cfg);

// Model checkpointing in the shared versioned format.
void save_model(const ModelParams& params, const std::string& path);
ModelParams restore_model(const std::string& path);

std::string train_trace_to_jsonl(const TrainTrace& trace);

}  // namespace costate
