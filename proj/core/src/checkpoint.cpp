#include "costate/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace costate {

namespace {

constexpr int kVersion = 1;

// FNV-1a over the little-endian IEEE-754 bytes of every tensor value, in
// name order. Shapes are validated structurally, so the checksum only
// covers the numeric payload.
std::uint64_t payload_checksum(
    const std::map<std::string, ad::Tensor>& tensors) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [name, t] : tensors) {
    mix(name.data(), name.size());
    for (double v : t.value()) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      unsigned char le[8];
      for (int b = 0; b < 8; ++b)
        le[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
      mix(le, sizeof(le));
    }
  }
  return h;
}

std::string checksum_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "costate-checkpoint";
  j["version"] = kVersion;
  j["kind"] = ckpt.kind;
  nlohmann::ordered_json hyper = nlohmann::ordered_json::object();
  for (const auto& [k, v] : ckpt.hyper) hyper[k] = v;
  j["hyper"] = hyper;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  for (const auto& [name, t] : ckpt.tensors) {
    tensors[name] = {{"shape", {t.rows(), t.cols()}}, {"data", t.value()}};
  }
  j["tensors"] = tensors;
  j["checksum"] = checksum_hex(payload_checksum(ckpt.tensors));

  std::ofstream out(path);
  if (!out) throw IoError("save_checkpoint: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_checkpoint: bad JSON in " + path + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "costate-checkpoint")
      throw DataError("load_checkpoint: " + path + " is not a checkpoint");
    if (j.at("version").get<int>() != kVersion)
      throw DataError("load_checkpoint: unsupported version in " + path);

    Checkpoint ckpt;
    ckpt.kind = j.at("kind").get<std::string>();
    for (const auto& [k, v] : j.at("hyper").items())
      ckpt.hyper[k] = v.get<double>();
    for (const auto& [name, entry] : j.at("tensors").items()) {
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      auto data = entry.at("data").get<std::vector<double>>();
      if (shape.size() != 2 || shape[0] * shape[1] != data.size())
        throw DataError("load_checkpoint: tensor " + name +
                        " shape header does not match data length");
      ckpt.tensors[name] =
          ad::Tensor::from(shape[0], shape[1], std::move(data), true);
    }
    const auto stored = j.at("checksum").get<std::string>();
    const auto actual = checksum_hex(payload_checksum(ckpt.tensors));
    if (stored != actual)
      throw DataError("load_checkpoint: checksum mismatch in " + path +
                      " (file corrupt)");
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_checkpoint: malformed checkpoint " + path + ": " +
                    e.what());
  }
}

}  // namespace costate
