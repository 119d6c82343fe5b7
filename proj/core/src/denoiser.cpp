#include "s2g/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "s2g/error.hpp"

namespace s2g {

// ---------------------------------------------------------------- BlockMask

BlockMask::BlockMask(std::size_t blocks) : keep_(blocks, true) {
  if (blocks == 0) throw ValueError("BlockMask: need at least one block");
}

BlockMask::BlockMask(std::vector<bool> keep_bits) : keep_(std::move(keep_bits)) {
  dropped_ = static_cast<std::size_t>(std::count(keep_.begin(), keep_.end(), false));
  if (keep_.empty() || dropped_ >= keep_.size())
    throw ValueError("BlockMask: at least one block must be kept");
}

BlockMask BlockMask::dropping(std::size_t blocks,
                              const std::vector<std::size_t>& dropped) {
  std::vector<bool> bits(blocks, true);
  for (auto j : dropped) {
    if (j >= blocks) throw ValueError("BlockMask: block index out of range");
    bits[j] = false;
  }
  return BlockMask(std::move(bits));
}

std::vector<std::size_t> BlockMask::dropped_blocks() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < keep_.size(); ++j)
    if (!keep_[j]) out.push_back(j);
  return out;
}

std::uint64_t BlockMask::drop_code() const noexcept {
  std::uint64_t code = 0;
  for (std::size_t j = 0; j < keep_.size() && j < 64; ++j)
    if (!keep_[j]) code |= std::uint64_t{1} << j;
  return code;
}

// ----------------------------------------------------------------- topology

std::size_t DenoiserTopology::param_count() const noexcept {
  const std::size_t h = hidden;
  return dim * h + h + time_features * h + h + (num_classes + 1) * h +
         blocks * (2 * h * h + 2 * h) + h * dim + dim;
}

void DenoiserTopology::validate() const {
  if (dim < 1 || dim > 2) throw ValueError("DenoiserTopology: dim must be 1 or 2");
  if (hidden < 1) throw ValueError("DenoiserTopology: hidden must be >= 1");
  if (blocks < 1) throw ValueError("DenoiserTopology: blocks must be >= 1");
  if (time_features < 2 || time_features % 2 != 0)
    throw ValueError("DenoiserTopology: time_features must be even and >= 2");
  if (num_classes < 1) throw ValueError("DenoiserTopology: num_classes must be >= 1");
}

ParamLayout::ParamLayout(const DenoiserTopology& topo) {
  const std::size_t h = topo.hidden;
  std::size_t off = 0;
  auto take = [&off](std::size_t n) {
    const std::size_t at = off;
    off += n;
    return at;
  };
  in_w = take(topo.dim * h);
  in_b = take(h);
  time_w = take(topo.time_features * h);
  time_b = take(h);
  class_table = take((topo.num_classes + 1) * h);
  for (std::size_t j = 0; j < topo.blocks; ++j) {
    Block b{};
    b.w1 = take(h * h);
    b.b1 = take(h);
    b.w2 = take(h * h);
    b.b2 = take(h);
    blocks.push_back(b);
  }
  out_w = take(h * topo.dim);
  out_b = take(topo.dim);
  total = off;
}

std::vector<double> time_features(int t, std::size_t count) {
  const std::size_t half = count / 2;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(1000.0) * static_cast<double>(i) /
                                 static_cast<double>(half));
    const double angle = static_cast<double>(t) * freq;
    out[i] = std::sin(angle);
    out[half + i] = std::cos(angle);
  }
  return out;
}

namespace {

void silu_into(std::span<const double> in, std::span<double> out) {
  kernels::sigmoid(in, out);
  for (std::size_t i = 0; i < in.size(); ++i) out[i] *= in[i];
}

/// grad *= silu'(pre), elementwise.
void silu_backward(std::span<const double> pre, std::span<double> grad) {
  thread_local std::vector<double> s;
  s.resize(pre.size());
  kernels::sigmoid(pre, s);
  for (std::size_t i = 0; i < pre.size(); ++i)
    grad[i] *= s[i] * (1.0 + pre[i] * (1.0 - s[i]));
}

std::span<const double> slice(std::span<const double> p, std::size_t off,
                              std::size_t n) {
  return p.subspan(off, n);
}

std::span<double> slice(std::span<double> p, std::size_t off, std::size_t n) {
  return p.subspan(off, n);
}

/// Transpose of an (rows x cols) row-major block.
std::vector<double> transpose(std::span<const double> w, std::size_t rows,
                              std::size_t cols) {
  std::vector<double> t(w.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = w[r * cols + c];
  return t;
}

}  // namespace

// ------------------------------------------------------------ BlockDenoiser

BlockDenoiser::BlockDenoiser(DenoiserTopology topo, Rng& init_rng)
    : topo_((topo.validate(), topo)),
      layout_(topo_),
      params_(layout_.total, 0.0) {
  const std::size_t h = topo_.hidden;
  auto fill_gauss = [&](std::size_t off, std::size_t n, double sd) {
    for (std::size_t i = 0; i < n; ++i) params_[off + i] = sd * init_rng.normal();
  };
  fill_gauss(layout_.in_w, topo_.dim * h, 1.0 / std::sqrt(double(topo_.dim)));
  fill_gauss(layout_.time_w, topo_.time_features * h,
             1.0 / std::sqrt(double(topo_.time_features)));
  fill_gauss(layout_.class_table, (topo_.num_classes + 1) * h, 1.0);
  for (const auto& b : layout_.blocks) {
    fill_gauss(b.w1, h * h, 1.0 / std::sqrt(double(h)));
    fill_gauss(b.w2, h * h, 1.0 / std::sqrt(double(h)));
  }
}

BlockDenoiser::BlockDenoiser(DenoiserTopology topo, std::vector<double> params)
    : topo_((topo.validate(), topo)), layout_(topo_), params_(std::move(params)) {
  if (params_.size() != layout_.total)
    throw DimensionError("BlockDenoiser: expected " + std::to_string(layout_.total) +
                         " parameters, got " + std::to_string(params_.size()));
}

void BlockDenoiser::check_mask(const BlockMask* mask) const {
  if (mask != nullptr && mask->size() != topo_.blocks)
    throw DimensionError("BlockDenoiser: mask has " + std::to_string(mask->size()) +
                         " bits, network has " + std::to_string(topo_.blocks) +
                         " blocks");
}

std::size_t BlockDenoiser::class_row(ClassLabel c) const {
  if (c.is_null()) return topo_.num_classes;
  if (static_cast<std::size_t>(c.id()) >= topo_.num_classes)
    throw ValueError("BlockDenoiser: class id " + std::to_string(c.id()) +
                     " out of range");
  return static_cast<std::size_t>(c.id());
}

Matrix BlockDenoiser::predict(const Matrix& x, int t, ClassLabel c,
                              const BlockMask* mask) const {
  check_mask(mask);
  if (x.cols() != topo_.dim) throw DimensionError("BlockDenoiser: input dim mismatch");
  const std::size_t n = x.rows();
  const std::size_t h = topo_.hidden;
  const std::span<const double> p = params_;

  // Condition-dependent bias shared by all rows.
  std::vector<double> bias(h);
  {
    const auto phi = time_features(t, topo_.time_features);
    kernels::affine_rows(phi, 1, topo_.time_features,
                         slice(p, layout_.time_w, topo_.time_features * h),
                         slice(p, layout_.time_b, h), bias, h);
    const auto in_b = slice(p, layout_.in_b, h);
    const auto row = slice(p, layout_.class_table + class_row(c) * h, h);
    for (std::size_t k = 0; k < h; ++k) bias[k] = in_b[k] + (bias[k] + row[k]);
  }

  std::vector<double> hid(n * h), act(n * h), pre(n * h), mid(n * h), delta(n * h);
  kernels::affine_rows(x.data(), n, topo_.dim, slice(p, layout_.in_w, topo_.dim * h),
                       bias, hid, h);
  for (std::size_t j = 0; j < topo_.blocks; ++j) {
    if (mask != nullptr && !mask->keeps(j)) continue;
    const auto& b = layout_.blocks[j];
    silu_into(hid, act);
    kernels::affine_rows(act, n, h, slice(p, b.w1, h * h), slice(p, b.b1, h), pre, h);
    silu_into(pre, mid);
    kernels::affine_rows(mid, n, h, slice(p, b.w2, h * h), slice(p, b.b2, h), delta, h);
    for (std::size_t i = 0; i < hid.size(); ++i) hid[i] += delta[i];
  }
  silu_into(hid, act);
  Matrix out(n, topo_.dim);
  kernels::affine_rows(act, n, h, slice(p, layout_.out_w, h * topo_.dim),
                       slice(p, layout_.out_b, topo_.dim), out.data(), topo_.dim);
  return out;
}

Matrix BlockDenoiser::forward(const Matrix& x, std::span<const int> t,
                              std::span<const ClassLabel> c, const BlockMask* mask,
                              Cache* cache) const {
  check_mask(mask);
  const std::size_t n = x.rows();
  if (x.cols() != topo_.dim) throw DimensionError("BlockDenoiser: input dim mismatch");
  if (t.size() != n || c.size() != n)
    throw DimensionError("BlockDenoiser::forward: per-row t/c size mismatch");
  const std::size_t h = topo_.hidden;
  const std::size_t e = topo_.time_features;
  const std::span<const double> p = params_;

  Cache local;
  Cache& k = cache != nullptr ? *cache : local;
  k.x = x;
  k.phi = Matrix(n, e);
  k.class_rows.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto phi = time_features(t[r], e);
    std::copy(phi.begin(), phi.end(), k.phi.row(r).begin());
    k.class_rows[r] = class_row(c[r]);
  }

  // Same association as predict(): in_b + ((phi W_t + b_t) + C[c]) + x W_in,
  // so a uniform-(t, c) batch reproduces predict() bit for bit.
  Matrix temb(n, h);
  kernels::affine_rows(k.phi.data(), n, e, slice(p, layout_.time_w, e * h),
                       slice(p, layout_.time_b, h), temb.data(), h);
  Matrix hid(n, h);
  {
    const auto in_b = slice(p, layout_.in_b, h);
    std::vector<double> bias(h);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = slice(p, layout_.class_table + k.class_rows[r] * h, h);
      for (std::size_t q = 0; q < h; ++q) bias[q] = in_b[q] + (temb(r, q) + row[q]);
      const auto xr = x.row(r);
      kernels::affine_rows(xr, 1, topo_.dim, slice(p, layout_.in_w, topo_.dim * h),
                           bias, hid.row(r), h);
    }
  }

  k.kept.assign(topo_.blocks, true);
  k.block_in.assign(topo_.blocks, Matrix());
  k.block_act.assign(topo_.blocks, Matrix());
  k.block_pre.assign(topo_.blocks, Matrix());
  k.block_mid.assign(topo_.blocks, Matrix());
  std::vector<double> delta(n * h);
  for (std::size_t j = 0; j < topo_.blocks; ++j) {
    if (mask != nullptr && !mask->keeps(j)) {
      k.kept[j] = false;
      continue;
    }
    const auto& b = layout_.blocks[j];
    k.block_in[j] = hid;
    Matrix act(n, h), pre(n, h), mid(n, h);
    silu_into(hid.data(), act.data());
    kernels::affine_rows(act.data(), n, h, slice(p, b.w1, h * h), slice(p, b.b1, h),
                         pre.data(), h);
    silu_into(pre.data(), mid.data());
    kernels::affine_rows(mid.data(), n, h, slice(p, b.w2, h * h), slice(p, b.b2, h),
                         delta, h);
    for (std::size_t i = 0; i < delta.size(); ++i) hid.data()[i] += delta[i];
    k.block_act[j] = std::move(act);
    k.block_pre[j] = std::move(pre);
    k.block_mid[j] = std::move(mid);
  }
  k.h_final = hid;
  k.a_final = Matrix(n, h);
  silu_into(hid.data(), k.a_final.data());
  Matrix out(n, topo_.dim);
  kernels::affine_rows(k.a_final.data(), n, h, slice(p, layout_.out_w, h * topo_.dim),
                       slice(p, layout_.out_b, topo_.dim), out.data(), topo_.dim);
  return out;
}

void BlockDenoiser::backward(const Cache& cache, const Matrix& grad_out,
                             std::span<double> grad) const {
  if (grad.size() != layout_.total)
    throw DimensionError("BlockDenoiser::backward: gradient buffer size mismatch");
  const std::size_t n = cache.x.rows();
  if (grad_out.rows() != n || grad_out.cols() != topo_.dim)
    throw DimensionError("BlockDenoiser::backward: grad_out shape mismatch");
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t h = topo_.hidden;
  const std::size_t e = topo_.time_features;
  const std::span<const double> p = params_;

  kernels::affine_backward_params(cache.a_final.data(), grad_out.data(), n, h, topo_.dim,
                                  slice(grad, layout_.out_w, h * topo_.dim),
                                  slice(grad, layout_.out_b, topo_.dim));
  std::vector<double> g_h(n * h), g_tmp(n * h), g_mid(n * h);
  {
    const auto w_t = transpose(slice(p, layout_.out_w, h * topo_.dim), h, topo_.dim);
    kernels::affine_backward_input(grad_out.data(), n, topo_.dim, w_t, g_h, h);
    silu_backward(cache.h_final.data(), g_h);
  }

  for (std::size_t jj = topo_.blocks; jj-- > 0;) {
    if (!cache.kept[jj]) continue;
    const auto& b = layout_.blocks[jj];
    // h_out = h_in + mid W2 + b2
    kernels::affine_backward_params(cache.block_mid[jj].data(), g_h, n, h, h,
                                    slice(grad, b.w2, h * h), slice(grad, b.b2, h));
    const auto w2_t = transpose(slice(p, b.w2, h * h), h, h);
    kernels::affine_backward_input(g_h, n, h, w2_t, g_mid, h);
    silu_backward(cache.block_pre[jj].data(), g_mid);
    kernels::affine_backward_params(cache.block_act[jj].data(), g_mid, n, h, h,
                                    slice(grad, b.w1, h * h), slice(grad, b.b1, h));
    const auto w1_t = transpose(slice(p, b.w1, h * h), h, h);
    kernels::affine_backward_input(g_mid, n, h, w1_t, g_tmp, h);
    silu_backward(cache.block_in[jj].data(), g_tmp);
    for (std::size_t i = 0; i < g_h.size(); ++i) g_h[i] += g_tmp[i];
  }

  kernels::affine_backward_params(cache.x.data(), g_h, n, topo_.dim, h,
                                  slice(grad, layout_.in_w, topo_.dim * h),
                                  slice(grad, layout_.in_b, h));
  kernels::affine_backward_params(cache.phi.data(), g_h, n, e, h,
                                  slice(grad, layout_.time_w, e * h),
                                  slice(grad, layout_.time_b, h));
  for (std::size_t r = 0; r < n; ++r) {
    auto row = slice(grad, layout_.class_table + cache.class_rows[r] * h, h);
    for (std::size_t q = 0; q < h; ++q) row[q] += g_h[r * h + q];
  }
}

// -------------------------------------------------------------------- masks

std::size_t drop_count_for(std::size_t blocks, double drop_ratio) {
  if (!(drop_ratio >= 0.0 && drop_ratio < 1.0))
    throw ValueError("drop_ratio must lie in [0, 1)");
  if (blocks < 2) throw ValueError("stochastic masks need at least two blocks");
  auto k = static_cast<std::size_t>(std::llround(static_cast<double>(blocks) * drop_ratio));
  return std::clamp<std::size_t>(k, 1, blocks - 1);
}

BlockMask generate_stochastic_mask(std::size_t blocks, double drop_ratio, Rng& rng) {
  return generate_mask_with_count(blocks, drop_count_for(blocks, drop_ratio), rng);
}

BlockMask generate_mask_with_count(std::size_t blocks, std::size_t count, Rng& rng) {
  if (count >= blocks)
    throw ValueError("cannot drop " + std::to_string(count) + " of " +
                     std::to_string(blocks) + " blocks");
  std::vector<std::size_t> order(blocks);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(blocks - i));
    std::swap(order[i], order[j]);
  }
  order.resize(count);
  return BlockMask::dropping(blocks, order);
}

std::vector<BlockMask> enumerate_all_masks(std::size_t blocks, std::size_t k) {
  if (k >= blocks) throw ValueError("enumerate_all_masks: k must be < B");
  std::vector<BlockMask> out;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.push_back(BlockMask::dropping(blocks, idx));
    // next combination in lexicographic order
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == blocks - k + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace s2g
