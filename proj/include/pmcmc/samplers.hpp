#pragma once

// Full MCMC kernels over (theta, x_{0:T}):
//   - pmmh_kernel:         pseudo-marginal MH with a bootstrap-filter estimate of Z_T(theta)
//   - pgibbs_kernel:       CSMC refresh of x, then MH on theta | x
//   - mpgibbs_kernel:      CSMC on the parameter-marginalised model, then index selection
//   - ideal_mh_kernel /
//     ideal_barker_kernel: exact-likelihood chains on theta alone
//
// Each kernel updates the state in place and reports whether theta moved.
// Proposal draws and accept/reject uniforms come from the `proposal` stream,
// all particle randomness from `smc`, and the m-PGibbs index from `selection`.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pmcmc/bootstrap.hpp"
#include "pmcmc/csmc.hpp"
#include "pmcmc/marginal.hpp"
#include "pmcmc/model.hpp"
#include "pmcmc/numeric.hpp"
#include "pmcmc/proposals.hpp"
#include "pmcmc/rng.hpp"

namespace pmcmc {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class Theta>
struct ChainState {
  Theta theta{};
  Trajectory trajectory;      // empty for the idealised chains
  double log_z = kNaN;        // log Z estimate (PMMH) or exact log Z (idealised)
  std::size_t index = 0;      // slot l of theta among theta^{1:M} (m-PGibbs)
};

struct KernelOutcome {
  bool accepted = false;
  /// CSMC returned the reference because every other particle had zero weight.
  bool degenerate = false;
};

/// Metropolis-Hastings accept: probability min(1, exp(log_ratio)).
template <class Rng>
bool mh_accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) return false;
  return draw_bernoulli(rng, log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio));
}

/// Barker's acceptance probability r / (1 + r), r = exp(log_ratio).
inline double barker_probability(double log_ratio) {
  if (std::isnan(log_ratio)) return 0.0;
  if (log_ratio >= 0.0) return 1.0 / (1.0 + std::exp(-log_ratio));
  const double r = std::exp(log_ratio);
  return r / (1.0 + r);
}

template <class Rng>
bool barker_accept(double log_ratio, Rng& rng) {
  return draw_bernoulli(rng, barker_probability(log_ratio));
}

/// Pseudo-marginal MH step with an arbitrary log-likelihood estimator
/// `estimate(theta, rng) -> log Z_hat`. Proposals outside the support are
/// rejected without calling the estimator or drawing an accept uniform.
template <ParametricModel M, class Proposal, class Estimator, class Rng>
KernelOutcome pseudo_marginal_step(ChainState<typename M::param_type>& state, const M& model,
                                   const Proposal& q, Estimator&& estimate, RngSet<Rng> rng) {
  const auto proposed = q.sample(state.theta, rng.proposal);
  if (!model.in_support(proposed)) return {};
  const double log_z = estimate(proposed, rng.smc);
  if (log_z == kNegInf) return {};
  const double log_ratio = log_z + model.log_prior(proposed) + q.log_density(state.theta, proposed) -
                           state.log_z - model.log_prior(state.theta) -
                           q.log_density(proposed, state.theta);
  if (!mh_accept(log_ratio, rng.proposal)) return {};
  state.theta = proposed;
  state.log_z = log_z;
  return {true, false};
}

/// PMMH: pseudo-marginal MH with the bootstrap filter's estimate. When
/// `keep_trajectory` is set, accepted moves also store a path drawn from the
/// filter's terminal weights.
template <ParametricModel M, class Proposal, class Rng>
KernelOutcome pmmh_kernel(ChainState<typename M::param_type>& state, const M& model,
                          const Proposal& q, BootstrapFilter<M>& filter, RngSet<Rng> rng,
                          bool keep_trajectory = false) {
  const FilterOutput* last = nullptr;
  auto estimate = [&](const typename M::param_type& th, Rng& r) {
    try {
      last = &filter.run(th, r);
      return last->log_z_estimate;
    } catch (const WeightCollapse&) {
      return kNegInf;
    }
  };
  const KernelOutcome out = pseudo_marginal_step(state, model, q, estimate, rng);
  if (out.accepted && keep_trajectory) {
    const std::size_t k = draw_index(rng.smc, std::span<const double>(last->terminal_weights));
    state.trajectory = last->trace(k);
  }
  return out;
}

/// Initial PMMH state: log Z estimate at theta.
template <ParametricModel M, class Rng>
ChainState<typename M::param_type> pmmh_initial_state(const M& model,
                                                      const typename M::param_type& theta,
                                                      BootstrapFilter<M>& filter, Rng& rng) {
  if (!model.in_support(theta)) throw ConfigError("initial theta outside the prior support");
  ChainState<typename M::param_type> s;
  s.theta = theta;
  s.log_z = filter.run(theta, rng).log_z_estimate;
  return s;
}

/// MH update of theta given the path, targeting p(theta) gamma_T(x | theta).
template <ParametricModel M, class Proposal, class Rng>
KernelOutcome theta_given_path_step(ChainState<typename M::param_type>& state, const M& model,
                                    const Proposal& q, Rng& rng) {
  const auto proposed = q.sample(state.theta, rng);
  if (!model.in_support(proposed)) return {};
  const std::size_t T = model.horizon();
  const double log_ratio = log_gamma(model, state.trajectory, proposed, T) +
                           model.log_prior(proposed) + q.log_density(state.theta, proposed) -
                           log_gamma(model, state.trajectory, state.theta, T) -
                           model.log_prior(state.theta) - q.log_density(proposed, state.theta);
  if (!mh_accept(log_ratio, rng)) return {};
  state.theta = proposed;
  return {true, false};
}

/// Classical particle Gibbs: CSMC refresh of x | theta, then MH on theta | x.
template <ParametricModel M, class Proposal, class Rng>
KernelOutcome pgibbs_kernel(ChainState<typename M::param_type>& state, const M& model,
                            const Proposal& q, const CsmcConfig& cfg, RngSet<Rng> rng,
                            ParticleSystem& ps) {
  const CsmcResult res = csmc_kernel(model, state.theta, state.trajectory, cfg, rng.smc, ps);
  state.trajectory = res.trajectory;
  KernelOutcome out = theta_given_path_step(state, model, q, rng.proposal);
  out.degenerate = res.degenerate;
  return out;
}

struct MPGibbsConfig {
  std::size_t num_parameters = 2;  // M
  MixtureVariant variant = MixtureVariant::kPosteriorMixture;
  CsmcConfig csmc{};
};

/// Marginalised particle Gibbs. state.index is the slot l holding the current
/// theta; the move counts as accepted when the selected slot changes.
template <MarkovModel M, ProposalPair P, class Rng>
KernelOutcome mpgibbs_kernel(ChainState<typename M::param_type>& state, const M& model,
                             const P& pair, const MPGibbsConfig& cfg, RngSet<Rng> rng,
                             ParticleSystem& ps) {
  using Theta = typename M::param_type;
  const std::size_t num = cfg.num_parameters;
  if (num == 0) throw ConfigError("m-PGibbs needs at least one parameter");
  const std::size_t l = state.index < num ? state.index : 0;

  const auto u = pair.sample_u(state.theta, rng.proposal);
  std::vector<Theta> thetas(num);
  for (std::size_t j = 0; j < num; ++j)
    thetas[j] = j == l ? state.theta : pair.sample_theta(u, rng.proposal);

  const IndexPosterior prior = index_prior(u, std::span<const Theta>(thetas), pair, model);
  const MarginalFeynmanKac<M, P> fk(model, thetas, pair, u, prior, cfg.variant);
  MarginalRatioEvaluator<M> evaluator(fk.parameters());
  CsmcResult res;
  try {
    res = csmc_kernel(fk, state.trajectory, cfg.csmc, evaluator, rng.smc, ps);
  } catch (const WeightCollapse&) {
    state.index = l;
    return {false, true};
  }

  IndexPosterior post;
  try {
    post = terminal_index_distribution(res.trajectory, std::span<const Theta>(thetas), u, pair,
                                       model);
  } catch (const WeightCollapse&) {
    state.index = l;
    return {false, true};
  }
  std::size_t chosen = l;
  if (num > 1) chosen = draw_index(rng.selection, std::span<const double>(post.probabilities()));

  state.trajectory = std::move(res.trajectory);
  state.theta = thetas[chosen];
  state.index = chosen;
  return {chosen != l, res.degenerate};
}

namespace detail {

template <ParametricModel M, class Proposal, class LogLik, class Accept, class Rng>
KernelOutcome exact_step(ChainState<typename M::param_type>& state, const M& model,
                         LogLik&& log_lik, const Proposal& q, Accept&& accept, Rng& rng) {
  const auto proposed = q.sample(state.theta, rng);
  if (!model.in_support(proposed)) return {};
  const double ll = log_lik(proposed);
  if (ll == kNegInf) return {};
  const double log_ratio = ll + model.log_prior(proposed) + q.log_density(state.theta, proposed) -
                           state.log_z - model.log_prior(state.theta) -
                           q.log_density(proposed, state.theta);
  if (!accept(log_ratio, rng)) return {};
  state.theta = proposed;
  state.log_z = ll;
  return {true, false};
}

}  // namespace detail

/// Exact MH on theta using `log_lik(theta)` = log Z_T(theta) (the Kalman
/// filter for the linear-Gaussian model). state.log_z caches log_lik(theta).
template <ParametricModel M, class Proposal, class LogLik, class Rng>
KernelOutcome ideal_mh_kernel(ChainState<typename M::param_type>& state, const M& model,
                              LogLik&& log_lik, const Proposal& q, Rng& rng) {
  return detail::exact_step(state, model, log_lik, q,
                            [](double lr, Rng& r) { return mh_accept(lr, r); }, rng);
}

/// Exact chain with Barker's acceptance r / (1 + r).
template <ParametricModel M, class Proposal, class LogLik, class Rng>
KernelOutcome ideal_barker_kernel(ChainState<typename M::param_type>& state, const M& model,
                                  LogLik&& log_lik, const Proposal& q, Rng& rng) {
  return detail::exact_step(state, model, log_lik, q,
                            [](double lr, Rng& r) { return barker_accept(lr, r); }, rng);
}

}  // namespace pmcmc
