#include "pmcmc/bootstrap.hpp"

namespace pmcmc {

Trajectory FilterOutput::trace(std::size_t n) const {
  const std::size_t N = num_particles;
  const std::size_t T = states.size() / N - 1;
  Trajectory x(T + 1);
  for (std::size_t t = T + 1; t-- > 0;) {
    x[t] = states[t * N + n];
    if (t > 0) n = ancestors[t * N + n];
  }
  return x;
}

}  // namespace pmcmc
