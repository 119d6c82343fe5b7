#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "s2g/predictor.hpp"
#include "s2g/tensor.hpp"

namespace s2g {

enum class GuidanceKind { Unguided, CFG, Autoguidance, NaiveS2, S2 };

std::string_view to_string(GuidanceKind kind) noexcept;
/// Accepts "unguided", "cfg", "autoguidance", "naive_s2", "s2".
GuidanceKind parse_guidance_kind(std::string_view text);

/// A guidance strategy and its scalars. Fields that do not apply to `kind`
/// keep their defaults and are ignored.
struct GuidanceSpec {
  GuidanceKind kind = GuidanceKind::Unguided;
  double lambda = 1.0;       // CFG, NaiveS2, S2
  double omega = 0.0;        // NaiveS2, S2
  int n_subnets = 1;         // NaiveS2
  bool exhaustive = false;   // NaiveS2: every C(B, k) mask instead of N draws
  double drop_ratio = 0.1;   // NaiveS2, S2
  std::optional<int> drop_count;  // overrides drop_ratio when set
  std::string weak_ref;      // Autoguidance: weak checkpoint id
  double ag_scale = 2.0;     // Autoguidance

  static GuidanceSpec unguided();
  static GuidanceSpec cfg(double lambda);
  static GuidanceSpec autoguidance(double ag_scale, std::string weak_ref = "weak");
  static GuidanceSpec naive_s2(double lambda, double omega, int n_subnets,
                               double drop_ratio = 0.1);
  static GuidanceSpec s2(double lambda, double omega, double drop_ratio = 0.1);

  /// Throws ValueError naming the field on a violated range.
  void validate() const;

  /// Blocks dropped per mask for a network with `blocks` blocks.
  std::size_t drops_for(std::size_t blocks) const;

  /// Sum of the coefficients applied to the predictions: 1 - omega for the
  /// S2 variants, 1 otherwise. Reported, never used to renormalize.
  double coefficient_sum() const noexcept;

  /// Denoiser forwards per timestep (Unguided 1, CFG 2, Autoguidance 2,
  /// S2 3, NaiveS2 2 + N). `blocks` resolves N for exhaustive NaiveS2.
  std::size_t calls_per_step(std::size_t blocks) const;

  bool operator==(const GuidanceSpec&) const = default;
};

// Combinators. All are affine in each prediction argument and operate on
// flattened predictions of equal length.

/// (1 - lambda) d_uncond + lambda d_cond, i.e. d_uncond + lambda (d_cond -
/// d_uncond) written so that lambda = 0 and lambda = 1 return a branch
/// exactly.
Vector cfg_combine(std::span<const double> d_uncond, std::span<const double> d_cond,
                   double lambda);

/// cfg_combine(...) - omega d_weak. The coefficients sum to 1 - omega.
Vector s2_combine(std::span<const double> d_uncond, std::span<const double> d_cond,
                  std::span<const double> d_weak, double lambda, double omega);

/// cfg_combine(...) - omega * mean(d_weak_list). Throws ValueError on an
/// empty list. The mean sums left to right, then divides by N.
Vector naive_s2_combine(std::span<const double> d_uncond,
                        std::span<const double> d_cond,
                        const std::vector<Vector>& d_weak_list, double lambda,
                        double omega);

/// (1 - w) d_weak_model + w d_strong.
Vector autoguidance_combine(std::span<const double> d_weak_model,
                            std::span<const double> d_strong, double ag_scale);

/// Mean of masked forwards: the Monte Carlo posterior mean of the noise
/// prediction over sub-networks.
Matrix posterior_mean_over_masks(const NoisePredictor& net, const Matrix& x, int t,
                                 ClassLabel c, const std::vector<BlockMask>& masks);

/// Per-coordinate population variance of masked forwards around their mean.
/// Requires at least two masks.
Matrix epistemic_variance(const NoisePredictor& net, const Matrix& x, int t,
                          ClassLabel c, const std::vector<BlockMask>& masks);

}  // namespace s2g
