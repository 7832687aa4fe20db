#pragma once

#include <string>

#include "crowdnav/encoder.hpp"
#include "crowdnav/mlp.hpp"

namespace crowdnav {

inline constexpr int kCheckpointVersion = 1;

// Versioned training snapshot: policy tensors, frozen normalizer statistics,
// the global step counter, and the canonical config text that produced it.
struct Checkpoint {
  PolicyParams params;
  RunningNormalizer normalizer;
  long long step = 0;
  std::string config_text;
};

std::string write_checkpoint_text(const Checkpoint& ckpt);
Checkpoint parse_checkpoint_text(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace crowdnav
