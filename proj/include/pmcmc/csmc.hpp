#pragma once

// Conditional SMC kernel for (possibly non-Markovian) Feynman-Kac models,
// with optional backward sampling.
//
// The kernel is written against a `FeynmanKac` object that proposes states
// and weighs them, carrying an optional fixed-width per-particle summary of
// the path (the "carry"). Backward weights come from an injected evaluator
// returning log[gamma_T(x^n_{0:t}, x'_{t+1:T}) / gamma_t(x^n_{0:t})] up to an
// additive constant shared by all n.
//
// Slot 0 holds the reference trajectory at every step.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pmcmc/model.hpp"
#include "pmcmc/numeric.hpp"
#include "pmcmc/rng.hpp"

namespace pmcmc {

enum class TerminalSelection {
  kStandardCategorical,  // k_T ~ Cat(W_T)
  kForcedMove,           // propose k' != ref, accept with min(1, W^ref_T / W^k'_T)
};

TerminalSelection parse_terminal_selection(const std::string& s);
std::string to_string(TerminalSelection s);

struct CsmcConfig {
  std::size_t num_particles = 16;
  bool backward_sampling = false;
  TerminalSelection terminal_selection = TerminalSelection::kStandardCategorical;

  void validate() const {
    if (num_particles < 2) throw ConfigError("CSMC needs at least 2 particles");
  }
};

/// Per-step particles, ancestors, weights and carries of one CSMC sweep.
class ParticleSystem {
 public:
  void reset(std::size_t horizon, std::size_t num_particles, std::size_t carry_width) {
    T_ = horizon;
    N_ = num_particles;
    width_ = carry_width;
    const std::size_t cells = (T_ + 1) * N_;
    states_.resize(cells);
    ancestors_.assign(cells, 0);
    log_weights_.resize(cells);
    weights_.resize(cells);
    carries_.resize(cells * width_);
  }

  std::size_t horizon() const noexcept { return T_; }
  std::size_t num_particles() const noexcept { return N_; }
  std::size_t carry_width() const noexcept { return width_; }

  Genealogy genealogy() const { return {N_, states_, ancestors_}; }

  double state(std::size_t t, std::size_t n) const { return states_[t * N_ + n]; }
  double& state(std::size_t t, std::size_t n) { return states_[t * N_ + n]; }
  std::uint32_t ancestor(std::size_t t, std::size_t n) const { return ancestors_[t * N_ + n]; }

  std::span<double> states(std::size_t t) { return std::span<double>(states_).subspan(t * N_, N_); }
  std::span<const double> states(std::size_t t) const {
    return std::span<const double>(states_).subspan(t * N_, N_);
  }
  std::span<std::uint32_t> ancestors(std::size_t t) {
    return std::span<std::uint32_t>(ancestors_).subspan(t * N_, N_);
  }
  std::span<double> log_weights(std::size_t t) {
    return std::span<double>(log_weights_).subspan(t * N_, N_);
  }
  std::span<const double> log_weights(std::size_t t) const {
    return std::span<const double>(log_weights_).subspan(t * N_, N_);
  }
  std::span<double> weights(std::size_t t) { return std::span<double>(weights_).subspan(t * N_, N_); }
  std::span<const double> weights(std::size_t t) const {
    return std::span<const double>(weights_).subspan(t * N_, N_);
  }
  std::span<double> carry(std::size_t t, std::size_t n) {
    return std::span<double>(carries_).subspan((t * N_ + n) * width_, width_);
  }
  std::span<const double> carry(std::size_t t, std::size_t n) const {
    return std::span<const double>(carries_).subspan((t * N_ + n) * width_, width_);
  }

  /// Full lineage of particle n at time t (t == horizon for complete paths).
  Trajectory trace(std::size_t n, std::size_t t) const {
    Trajectory x(t + 1);
    for (std::size_t s = t + 1; s-- > 0;) {
      x[s] = state(s, n);
      if (s > 0) n = ancestor(s, n);
    }
    return x;
  }

 private:
  std::size_t T_ = 0, N_ = 0, width_ = 0;
  std::vector<double> states_;
  std::vector<std::uint32_t> ancestors_;
  std::vector<double> log_weights_;
  std::vector<double> weights_;
  std::vector<double> carries_;
};

struct CsmcResult {
  Trajectory trajectory;
  std::size_t terminal_index = 0;
  /// Every non-reference particle had zero weight at the final step.
  bool degenerate = false;
};

/// Bootstrap Feynman-Kac model at a fixed parameter: propose from the model
/// transition, weigh by the potential. No carry.
template <ParametricModel M>
class ModelFeynmanKac {
 public:
  ModelFeynmanKac(const M& model, const typename M::param_type& theta)
      : model_(&model), bound_(model.bind(theta)) {}

  std::size_t horizon() const { return model_->horizon(); }
  std::size_t carry_width() const { return 0; }
  std::span<const double> initial_carry() const { return {}; }

  template <class Rng>
  double propose(std::size_t t, const PathView& parent, std::span<const double>, Rng& rng) const {
    return bound_.sample_transition(t, parent, rng);
  }
  double weigh(std::size_t t, const PathView& path, std::span<const double>,
               std::span<double>) const {
    return bound_.log_potential(t, path);
  }

  const bound_t<M>& bound() const { return bound_; }

 private:
  const M* model_;
  bound_t<M> bound_;
};

/// Backward ratio by direct summation of the tail log-densities along the
/// concatenated path. O(T - t) per particle; valid for any model.
template <ParametricModel M>
class FullRatioEvaluator {
 public:
  FullRatioEvaluator(const M& model, const typename M::param_type& theta)
      : model_(&model), bound_(model.bind(theta)) {}

  void begin(const ParticleSystem&, std::size_t) {}
  void log_ratios(const ParticleSystem& ps, std::size_t t, std::span<const double> tail,
                  std::span<double> out) {
    const Genealogy g = ps.genealogy();
    const std::size_t T = ps.horizon();
    for (std::size_t n = 0; n < ps.num_particles(); ++n) {
      const auto path = PathView::lineage(g, t, n, tail);
      double acc = 0.0;
      for (std::size_t s = t + 1; s <= T && acc > kNegInf; ++s)
        acc += log_increment(bound_, s, path.prefix(s + 1));
      out[n] = acc;
    }
  }
  void select(const ParticleSystem&, std::size_t, std::size_t) {}

 private:
  const M* model_;
  bound_t<M> bound_;
};

/// Backward ratio for Markov models: only the link term
/// log p_{t+1}(x'_{t+1} | x^n_t) + log g_{t+1}(x^n_t, x'_{t+1}) depends on n.
template <MarkovModel M>
class MarkovRatioEvaluator {
 public:
  MarkovRatioEvaluator(const M& model, const typename M::param_type& theta)
      : bound_(model.bind(theta)) {}

  void begin(const ParticleSystem&, std::size_t) {}
  void log_ratios(const ParticleSystem& ps, std::size_t t, std::span<const double> tail,
                  std::span<double> out) {
    const double next = tail[0];
    for (std::size_t n = 0; n < ps.num_particles(); ++n) {
      const auto window = PathView::markov_window(t + 2, ps.state(t, n), next);
      out[n] = log_increment(bound_, t + 1, window);
    }
  }
  void select(const ParticleSystem&, std::size_t, std::size_t) {}

 private:
  bound_t<M> bound_;
};

/// Backward pass: x'_T = x^{k_T}_T, then for t = T-1..0 draw k_t with
/// probability proportional to W^n_t times the evaluator's ratio.
/// Throws WeightCollapse(t) if every backward weight vanishes.
template <class Evaluator, class Rng>
Trajectory backward_sampling_pass(const ParticleSystem& ps, std::size_t terminal_index,
                                  Evaluator& evaluator, Rng& rng) {
  const std::size_t T = ps.horizon();
  const std::size_t N = ps.num_particles();
  Trajectory x(T + 1);
  x[T] = ps.state(T, terminal_index);
  evaluator.begin(ps, terminal_index);
  std::vector<double> ratio(N), lw(N), w(N);
  for (std::size_t t = T; t-- > 0;) {
    evaluator.log_ratios(ps, t, std::span<const double>(x).subspan(t + 1), ratio);
    const auto logw = ps.log_weights(t);
    for (std::size_t n = 0; n < N; ++n)
      lw[n] = (logw[n] == kNegInf || ratio[n] == kNegInf) ? kNegInf : logw[n] + ratio[n];
    try {
      normalize_log_weights(lw, w);
    } catch (const WeightCollapse&) {
      throw WeightCollapse(t, "backward weight collapse");
    }
    const std::size_t k = draw_index(rng, w);
    x[t] = ps.state(t, k);
    evaluator.select(ps, t, k);
  }
  return x;
}

namespace detail {

template <class Rng>
std::size_t select_terminal(std::span<const double> w, TerminalSelection rule, Rng& rng,
                            std::vector<double>& scratch) {
  if (rule == TerminalSelection::kStandardCategorical) return draw_index(rng, w);
  // Propose among non-reference slots in proportion to their weights.
  double rest = 0.0;
  for (std::size_t n = 1; n < w.size(); ++n) rest += w[n];
  if (rest <= 0.0) return 0;
  scratch.assign(w.begin() + 1, w.end());
  for (double& v : scratch) v /= rest;
  const std::size_t k = 1 + draw_index(rng, std::span<const double>(scratch));
  const double accept = std::min(1.0, w[0] / w[k]);
  return draw_bernoulli(rng, accept) ? k : 0;
}

}  // namespace detail

/// One CSMC sweep conditioned on `reference`. `fk` must satisfy the
/// Feynman-Kac interface documented at the top of this header; `evaluator`
/// is only used when cfg.backward_sampling is set.
template <class FK, class Evaluator, class Rng>
CsmcResult csmc_kernel(const FK& fk, std::span<const double> reference, const CsmcConfig& cfg,
                       Evaluator& evaluator, Rng& rng, ParticleSystem& ps) {
  cfg.validate();
  const std::size_t T = fk.horizon();
  if (reference.size() != T + 1)
    throw std::invalid_argument("csmc_kernel: reference length must be T + 1");
  const std::size_t N = cfg.num_particles;
  ps.reset(T, N, fk.carry_width());
  const Genealogy g = ps.genealogy();
  std::vector<double> scratch;

  auto initial = fk.initial_carry();
  ps.state(0, 0) = reference[0];
  for (std::size_t n = 1; n < N; ++n) ps.state(0, n) = fk.propose(0, PathView{}, initial, rng);
  for (std::size_t n = 0; n < N; ++n)
    ps.log_weights(0)[n] = fk.weigh(0, PathView::lineage(g, 0, n), initial, ps.carry(0, n));

  for (std::size_t t = 1; t <= T; ++t) {
    try {
      normalize_log_weights(ps.log_weights(t - 1), ps.weights(t - 1));
    } catch (const WeightCollapse&) {
      throw WeightCollapse(t - 1);
    }
    auto anc = ps.ancestors(t);
    anc[0] = 0;
    draw_multinomial(ps.weights(t - 1), anc.subspan(1), rng, scratch);
    ps.state(t, 0) = reference[t];
    for (std::size_t n = 1; n < N; ++n)
      ps.state(t, n) =
          fk.propose(t, PathView::lineage(g, t - 1, anc[n]), ps.carry(t - 1, anc[n]), rng);
    for (std::size_t n = 0; n < N; ++n)
      ps.log_weights(t)[n] =
          fk.weigh(t, PathView::lineage(g, t, n), ps.carry(t - 1, anc[n]), ps.carry(t, n));
  }
  try {
    normalize_log_weights(ps.log_weights(T), ps.weights(T));
  } catch (const WeightCollapse&) {
    throw WeightCollapse(T);
  }

  CsmcResult res;
  const auto wT = ps.weights(T);
  res.degenerate = wT[0] == 1.0;
  res.terminal_index = detail::select_terminal(wT, cfg.terminal_selection, rng, scratch);
  if (cfg.backward_sampling)
    res.trajectory = backward_sampling_pass(ps, res.terminal_index, evaluator, rng);
  else
    res.trajectory = ps.trace(res.terminal_index, T);
  return res;
}

/// Fixed-parameter CSMC on a model: bootstrap proposals, Markov backward
/// ratios when the model is Markov and full-path ratios otherwise.
template <ParametricModel M, class Rng>
CsmcResult csmc_kernel(const M& model, const typename M::param_type& theta,
                       std::span<const double> reference, const CsmcConfig& cfg, Rng& rng,
                       ParticleSystem& ps) {
  const ModelFeynmanKac<M> fk(model, theta);
  if constexpr (M::is_markov) {
    MarkovRatioEvaluator<M> ev(model, theta);
    return csmc_kernel(fk, reference, cfg, ev, rng, ps);
  } else {
    FullRatioEvaluator<M> ev(model, theta);
    return csmc_kernel(fk, reference, cfg, ev, rng, ps);
  }
}

template <ParametricModel M, class Rng>
CsmcResult csmc_kernel(const M& model, const typename M::param_type& theta,
                       std::span<const double> reference, const CsmcConfig& cfg, Rng& rng) {
  ParticleSystem ps;
  return csmc_kernel(model, theta, reference, cfg, rng, ps);
}

}  // namespace pmcmc
