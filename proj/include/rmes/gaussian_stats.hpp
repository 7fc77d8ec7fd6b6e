#pragma once

// Standard-normal primitives and upper-truncated Gaussian quantities. All
// entropies are in nats.

#include <span>

namespace rmes {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

/// Below this argument log_std_cdf switches to the Mills-ratio continued fraction.
inline constexpr double kLogCdfAsymptoticThreshold = -8.0;

[[nodiscard]] double std_pdf(double z);
[[nodiscard]] double log_std_pdf(double z);
[[nodiscard]] double std_cdf(double z);

/// log Ψ(z). Finite for every finite z, including far in the lower tail.
[[nodiscard]] double log_std_cdf(double z);

/// N(y; mean, variance) for variance > 0.
[[nodiscard]] double normal_pdf(double y, double mean, double variance);
[[nodiscard]] double log_normal_pdf(double y, double mean, double variance);

/// ψ(z) / Ψ(z), the derivative of log Ψ. Stable in both tails.
[[nodiscard]] double inverse_mills_ratio(double z);

/// Gaussian N(mean, stddev²) restricted to (-inf, upper] and renormalized.
struct UpperTruncatedGaussian {
  double mean = 0.0;
  double stddev = 1.0;
  double upper = 0.0;  // may be +inf

  /// h = (upper - mean) / stddev.
  [[nodiscard]] double standardized_bound() const;
  void validate() const;
};

[[nodiscard]] double trunc_gauss_entropy(const UpperTruncatedGaussian& tg);
[[nodiscard]] double trunc_gauss_pdf(const UpperTruncatedGaussian& tg, double y);

/// log Σ exp(v_i) without overflow. Throws InputError on an empty span.
[[nodiscard]] double log_sum_exp(std::span<const double> values);

}  // namespace rmes
