#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "s2g/predictor.hpp"
#include "s2g/rng.hpp"
#include "s2g/tensor.hpp"

namespace s2g {

struct DenoiserTopology {
  std::size_t dim = 1;
  std::size_t hidden = 64;
  std::size_t blocks = 6;
  std::size_t time_features = 16;  // even
  std::size_t num_classes = 2;

  std::size_t param_count() const noexcept;
  void validate() const;
  bool operator==(const DenoiserTopology&) const = default;
};

/// Offsets of each parameter group inside the flat parameter vector.
///
/// Order: input W (dim x H), input b (H), time W (E x H), time b (H),
/// class table ((K + 1) x H, last row = null token), then per block
/// W1 (H x H), b1 (H), W2 (H x H), b2 (H), then output W (H x dim),
/// output b (dim). Weight matrices are stored (in x out), row-major.
struct ParamLayout {
  struct Block {
    std::size_t w1, b1, w2, b2;
  };
  std::size_t in_w, in_b, time_w, time_b, class_table;
  std::vector<Block> blocks;
  std::size_t out_w, out_b, total;

  explicit ParamLayout(const DenoiserTopology& topo);
};

/// Sinusoidal timestep features: for i < E/2, f_i = 1000^(-i / (E/2)),
/// features are [sin(t f_0) .. sin(t f_{E/2-1}), cos(t f_0) .. cos(...)].
std::vector<double> time_features(int t, std::size_t count);

/// Residual MLP noise predictor eps(x_t, t, c) with maskable blocks.
///
///   h = x W_in + b_in + phi(t) W_t + b_t + C[c]
///   h = h + W2 silu(W1 silu(h) + b1) + b2        for every kept block
///   eps = silu(h) W_out + b_out
///
/// A dropped block is skipped, so it acts as the identity on h.
class BlockDenoiser final : public NoisePredictor {
 public:
  /// Fan-in scaled Gaussian weights, zero biases, N(0, 1) class table and a
  /// zero output projection.
  BlockDenoiser(DenoiserTopology topo, Rng& init_rng);
  BlockDenoiser(DenoiserTopology topo, std::vector<double> params);

  const DenoiserTopology& topology() const noexcept { return topo_; }
  const ParamLayout& layout() const noexcept { return layout_; }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  std::size_t dim() const override { return topo_.dim; }
  std::size_t num_classes() const override { return topo_.num_classes; }
  std::size_t block_count() const override { return topo_.blocks; }

  Matrix predict(const Matrix& x, int t, ClassLabel c,
                 const BlockMask* mask = nullptr) const override;

  /// Activations kept by forward_train() for backward().
  struct Cache {
    Matrix x, phi;
    std::vector<std::size_t> class_rows;
    std::vector<Matrix> block_in, block_act, block_pre, block_mid;
    Matrix h_final, a_final;
    std::vector<bool> kept;
  };

  /// Forward with a timestep and condition per row.
  Matrix forward(const Matrix& x, std::span<const int> t,
                 std::span<const ClassLabel> c, const BlockMask* mask,
                 Cache* cache) const;

  /// Reverse-mode gradient of a loss whose gradient w.r.t. the forward output
  /// is `grad_out`. Overwrites `grad` (size param_count()). Parameters of
  /// dropped blocks receive exactly zero.
  void backward(const Cache& cache, const Matrix& grad_out,
                std::span<double> grad) const;

 private:
  void check_mask(const BlockMask* mask) const;
  std::size_t class_row(ClassLabel c) const;

  DenoiserTopology topo_;
  ParamLayout layout_;
  std::vector<double> params_;
};

/// Number of blocks dropped for a ratio: round(B * ratio), at least 1 and at
/// most B - 1.
std::size_t drop_count_for(std::size_t blocks, double drop_ratio);

/// Drops exactly drop_count_for(B, ratio) distinct, uniformly chosen blocks.
BlockMask generate_stochastic_mask(std::size_t blocks, double drop_ratio,
                                   Rng& rng);
/// Drops exactly `count` distinct uniformly chosen blocks (partial
/// Fisher-Yates over uniform_int draws). count may be 0.
BlockMask generate_mask_with_count(std::size_t blocks, std::size_t count,
                                   Rng& rng);

/// All C(B, k) masks dropping k blocks, in lexicographic order of the dropped
/// index sets.
std::vector<BlockMask> enumerate_all_masks(std::size_t blocks, std::size_t k);

}  // namespace s2g
