#pragma once

// Log-space arithmetic shared by every sampler in the library.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmcmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

/// Raised when every weight of a population is zero (log-weight -inf).
class WeightCollapse : public std::runtime_error {
 public:
  explicit WeightCollapse(std::size_t step, const std::string& what = "total weight collapse")
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Invalid configuration (unsupported proposal variant, bad counts, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// log(sum(exp(values))) computed relative to the maximum element.
/// All -inf input yields -inf; empty input throws.
double log_sum_exp(std::span<const double> values);

inline double log_sum_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == kNegInf) return kNegInf;
  return a + std::log1p(std::exp(b - a));
}

/// Normalised probabilities proportional to exp(logw). Throws WeightCollapse
/// (step 0) when every entry is -inf.
std::vector<double> normalize_log_weights(std::span<const double> logw);

/// Allocation-free variant; `out` must have the size of `logw`. Returns the
/// log normaliser log(sum(exp(logw))).
double normalize_log_weights(std::span<const double> logw, std::span<double> out);

inline double log_normal_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(variance) + d * d / variance);
}

/// log-density of an inverse gamma distribution with shape `a` and scale `b`.
inline double log_inverse_gamma_pdf(double x, double a, double b) {
  if (!(x > 0.0)) return kNegInf;
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

}  // namespace pmcmc
