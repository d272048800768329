#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "edgeflow/tensor.hpp"

namespace edgeflow {

struct AdamState {
  uint64_t t = 0;                // update count
  std::vector<Tensor> m, v;      // first/second moments, registry order
};

// Versioned binary container ("EFCK" magic, little-endian lengths, fp64
// payloads). Save -> load -> save is byte-identical.
struct Checkpoint {
  uint32_t version = 1;
  uint64_t config_hash = 0;
  uint64_t step = 0;
  uint32_t epoch = 0;
  std::string rng_state;
  std::string vocab_text;
  std::vector<std::pair<std::string, Tensor>> params;
  bool has_adam = false;
  AdamState adam;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
// expected_config_hash >= 0 enforces a match; pass -1 to skip the check.
Checkpoint load_checkpoint(const std::string& path);

uint64_t fnv1a64(const std::string& text);

}  // namespace edgeflow
