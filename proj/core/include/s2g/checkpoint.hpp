#pragma once

#include <cstdint>
#include <string>

#include "s2g/denoiser.hpp"
#include "s2g/schedule.hpp"

namespace s2g {

/// Little-endian binary checkpoint, layout documented in docs/checkpoint.md:
///
///   offset  size  field
///   0       8     magic "S2GCKPT1"
///   8       4     u32 format version (1)
///   12      4     u32 dim
///   16      4     u32 hidden
///   20      4     u32 blocks
///   24      4     u32 time_features
///   28      4     u32 num_classes
///   32      4     u32 schedule T
///   36      8     f64 beta_start (1000-step units)
///   44      8     f64 beta_end   (1000-step units)
///   52      8     u64 training-config hash
///   60      8     u64 parameter count P
///   68      8*P   f64 parameters in ParamLayout order
struct Checkpoint {
  DenoiserTopology topology;
  int T = 200;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  std::uint64_t train_config_hash = 0;
  std::vector<double> params;

  BlockDenoiser network() const { return BlockDenoiser(topology, params); }
  NoiseSchedule schedule() const { return NoiseSchedule::linear(T, beta_start, beta_end); }
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

}  // namespace s2g
