#include "pmcmc/numeric.hpp"

#include <algorithm>

namespace pmcmc {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  const double m = *std::max_element(values.begin(), values.end());
  if (m == kNegInf) return kNegInf;
  if (std::isinf(m)) return m;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

double normalize_log_weights(std::span<const double> logw, std::span<double> out) {
  if (logw.empty()) throw std::invalid_argument("normalize_log_weights: empty input");
  const double m = *std::max_element(logw.begin(), logw.end());
  if (m == kNegInf || std::isnan(m)) throw WeightCollapse(0);
  double acc = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    out[i] = std::exp(logw[i] - m);
    acc += out[i];
  }
  for (double& w : out) w /= acc;
  return m + std::log(acc);
}

std::vector<double> normalize_log_weights(std::span<const double> logw) {
  std::vector<double> out(logw.size());
  normalize_log_weights(logw, out);
  return out;
}

}  // namespace pmcmc
