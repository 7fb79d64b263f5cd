#pragma once

// Bootstrap particle filter with multinomial resampling at every step. Its
// normalising-constant estimate is unbiased for Z_T(theta).

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pmcmc/model.hpp"
#include "pmcmc/numeric.hpp"
#include "pmcmc/rng.hpp"

namespace pmcmc {

struct FilterOutput {
  double log_z_estimate = 0.0;
  std::size_t num_particles = 0;
  std::vector<double> states;            // (T+1) x N
  std::vector<std::uint32_t> ancestors;  // (T+1) x N
  std::vector<double> terminal_weights;  // normalised W_T

  std::span<const double> terminal_states() const {
    return std::span<const double>(states).last(num_particles);
  }
  Genealogy genealogy() const { return {num_particles, states, ancestors}; }

  /// Path of terminal particle n.
  Trajectory trace(std::size_t n) const;
};

template <ParametricModel M>
class BootstrapFilter {
 public:
  using param_type = typename M::param_type;

  BootstrapFilter(const M& model, std::size_t num_particles) : model_(&model), N_(num_particles) {
    if (N_ == 0) throw std::invalid_argument("bootstrap_filter: N must be >= 1");
  }

  /// Runs the filter; throws WeightCollapse carrying the step index when all
  /// weights vanish.
  template <class Rng>
  const FilterOutput& run(const param_type& theta, Rng& rng) {
    const std::size_t T = model_->horizon();
    const std::size_t N = N_;
    out_.num_particles = N;
    out_.states.resize((T + 1) * N);
    out_.ancestors.assign((T + 1) * N, 0);
    logw_.resize(N);
    w_.resize(N);
    const auto bound = model_->bind(theta);
    const Genealogy g = out_.genealogy();
    const double log_n = std::log(static_cast<double>(N));

    double log_z = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      out_.states[n] = bound.sample_transition(0, PathView{}, rng);
      logw_[n] = bound.log_potential(0, PathView::lineage(g, 0, n));
    }
    for (std::size_t t = 0;; ++t) {
      double lse;
      try {
        lse = normalize_log_weights(logw_, w_);
      } catch (const WeightCollapse&) {
        throw WeightCollapse(t);
      }
      log_z += lse - log_n;
      if (t == T) break;
      auto anc = std::span<std::uint32_t>(out_.ancestors).subspan((t + 1) * N, N);
      draw_multinomial(w_, anc, rng, scratch_);
      for (std::size_t n = 0; n < N; ++n) {
        out_.states[(t + 1) * N + n] =
            bound.sample_transition(t + 1, PathView::lineage(g, t, anc[n]), rng);
        logw_[n] = bound.log_potential(t + 1, PathView::lineage(g, t + 1, n));
      }
    }
    out_.log_z_estimate = log_z;
    out_.terminal_weights = w_;
    return out_;
  }

 private:
  const M* model_;
  std::size_t N_;
  FilterOutput out_;
  std::vector<double> logw_, w_, scratch_;
};

template <ParametricModel M, class Rng>
FilterOutput bootstrap_filter(const M& model, const typename M::param_type& theta,
                              std::size_t num_particles, Rng& rng) {
  BootstrapFilter<M> f(model, num_particles);
  return f.run(theta, rng);
}

}  // namespace pmcmc
