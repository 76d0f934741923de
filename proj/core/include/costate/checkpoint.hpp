#pragma once

#include <map>
#include <string>

#include "costate/tensor.hpp"

namespace costate {

// Versioned JSON checkpoint shared by the collaborative model and the VAE
// baseline: named tensors plus a free-form hyperparameter map, protected
// by an FNV-1a checksum over the tensor payloads.
struct Checkpoint {
  std::string kind;  // "collab" or "vae"
  std::map<std::string, ad::Tensor> tensors;
  std::map<std::string, double> hyper;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

// Verifies checksum and shape consistency; throws DataError on corruption
// or version mismatch.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace costate
