#include "pmcmc/rng.hpp"

#include <cmath>
#include <string>

namespace pmcmc {

void validate_simplex(std::span<const double> w, double tol) {
  if (w.empty()) throw std::invalid_argument("simplex: empty");
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("simplex: negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol)
    throw std::invalid_argument("simplex: entries sum to " + std::to_string(sum));
}

}  // namespace pmcmc
