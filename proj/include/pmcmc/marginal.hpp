#pragma once

// The parameter-marginalised Feynman-Kac model behind m-PGibbs.
//
// Given parameters theta^{1:M}, an auxiliary u and an index prior
//   p(l | u, theta^{1:M}) ∝ p(theta^l) q(u | theta^l) prod_{j != l} q(theta^j | u),
// the marginal path density is
//   gamma_t(x_{0:t}) ∝ sum_l p(l | u, theta^{1:M}) prod_{s <= t} p_s(x_s | x_{s-1}, theta^l) g_s(x_{s-1:s}; theta^l).
// Each particle carries alpha_{t,l} = log p(l | ...) + sum_{s<=t} log[p_s g_s](theta^l),
// the path-density cache. Normalising it gives the running index posterior;
// differencing its log-sum-exp gives the marginal increment eta_t.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "pmcmc/csmc.hpp"
#include "pmcmc/linear_gaussian.hpp"
#include "pmcmc/model.hpp"
#include "pmcmc/numeric.hpp"
#include "pmcmc/proposals.hpp"

namespace pmcmc {

enum class MixtureVariant { kPriorMixture, kPosteriorMixture, kClosedFormPriorMixture };

MixtureVariant parse_mixture_variant(const std::string& s);
std::string to_string(MixtureVariant v);

/// Categorical distribution over parameter indices, stored as normalised
/// log-weights (log-sum-exp equal to 0).
struct IndexPosterior {
  std::vector<double> log_weights;

  std::size_t size() const noexcept { return log_weights.size(); }
  std::vector<double> probabilities() const {
    std::vector<double> p(log_weights.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_weights[i]);
    return p;
  }

  /// Normalises `logw` in place. Throws WeightCollapse(step) on total collapse.
  static IndexPosterior from_unnormalized(std::vector<double> logw, std::size_t step = 0) {
    if (logw.empty()) throw std::invalid_argument("IndexPosterior: empty");
    const double z = log_sum_exp(logw);
    if (z == kNegInf || std::isnan(z)) throw WeightCollapse(step, "index posterior collapse");
    for (double& v : logw) v -= z;
    return {std::move(logw)};
  }
};

/// p(l | u, theta^{1:M}). Parameters outside the prior support get weight 0.
template <ParametricModel M, ProposalPair P>
IndexPosterior index_prior(const typename P::u_type& u,
                           std::span<const typename M::param_type> thetas, const P& pair,
                           const M& model) {
  const std::size_t n = thetas.size();
  if (n == 0) throw std::invalid_argument("index_prior: need at least one parameter");
  std::vector<double> log_q_theta(n), logw(n, kNegInf);
  bool any = false;
  for (std::size_t j = 0; j < n; ++j) log_q_theta[j] = pair.log_q_theta(thetas[j], u);
  for (std::size_t l = 0; l < n; ++l) {
    if (!model.in_support(thetas[l])) continue;
    any = true;
    double acc = model.log_prior(thetas[l]) + pair.log_q_u(u, thetas[l]);
    for (std::size_t j = 0; j < n; ++j)
      if (j != l) acc += log_q_theta[j];
    logw[l] = acc;
  }
  if (!any) throw std::domain_error("index_prior: no parameter inside the prior support");
  return IndexPosterior::from_unnormalized(std::move(logw));
}

/// Bound models for every parameter; entries whose prior weight is zero are
/// never evaluated (their densities may be undefined, e.g. negative variances).
template <ParametricModel M>
class ParameterSet {
 public:
  ParameterSet(const M& model, std::span<const typename M::param_type> thetas,
               std::span<const double> index_log_weights) {
    bounds_.reserve(thetas.size());
    for (std::size_t l = 0; l < thetas.size(); ++l) {
      const bool on = index_log_weights[l] > kNegInf && model.in_support(thetas[l]);
      active_.push_back(on);
      bounds_.push_back(model.bind(on ? thetas[l] : first_active(model, thetas, index_log_weights)));
    }
  }

  std::size_t size() const noexcept { return bounds_.size(); }
  bool active(std::size_t l) const { return active_[l]; }
  const bound_t<M>& bound(std::size_t l) const { return bounds_[l]; }

 private:
  static typename M::param_type first_active(const M& model,
                                             std::span<const typename M::param_type> thetas,
                                             std::span<const double> lw) {
    for (std::size_t l = 0; l < thetas.size(); ++l)
      if (lw[l] > kNegInf && model.in_support(thetas[l])) return thetas[l];
    throw std::domain_error("ParameterSet: no active parameter");
  }

  std::vector<bound_t<M>> bounds_;
  std::vector<char> active_;
};

namespace detail {

/// log p_t(x | prev; theta^l) for a Markov bound model.
template <class B>
double log_trans(const B& b, std::size_t t, double prev, double x) {
  return b.log_transition(t, PathView::markov_window(t, prev, prev), x);
}

template <class B>
double log_pot(const B& b, std::size_t t, double prev, double x) {
  return b.log_potential(t, PathView::markov_window(t + 1, prev, x));
}

}  // namespace detail

/// Running-posterior update: new_l ∝ old_l + log p_t(x_t | x_{t-1}, theta^l) + log g_t(x_{t-1:t}; theta^l).
/// x_prev is ignored at t = 0.
template <MarkovModel M>
IndexPosterior update_index_posterior(const IndexPosterior& post, std::size_t t, double x_prev,
                                      double x, const ParameterSet<M>& params) {
  std::vector<double> lw(post.size(), kNegInf);
  for (std::size_t l = 0; l < post.size(); ++l) {
    if (post.log_weights[l] == kNegInf || !params.active(l)) continue;
    const auto& b = params.bound(l);
    const double lp = detail::log_trans(b, t, x_prev, x);
    if (lp == kNegInf) continue;
    lw[l] = post.log_weights[l] + lp + detail::log_pot(b, t, x_prev, x);
  }
  return IndexPosterior::from_unnormalized(std::move(lw), t);
}

/// log eta_t = log sum_l p_t(x_t | x_{t-1}, theta^l) g_t(x_{t-1:t}; theta^l) pi_{t-1}(l).
template <MarkovModel M>
double marginal_eta(std::size_t t, double x_prev, double x, const IndexPosterior& post,
                    const ParameterSet<M>& params) {
  std::vector<double> v(post.size(), kNegInf);
  for (std::size_t l = 0; l < post.size(); ++l) {
    if (post.log_weights[l] == kNegInf || !params.active(l)) continue;
    const auto& b = params.bound(l);
    const double lp = detail::log_trans(b, t, x_prev, x);
    if (lp == kNegInf) continue;
    v[l] = post.log_weights[l] + lp + detail::log_pot(b, t, x_prev, x);
  }
  return log_sum_exp(v);
}

/// Closed-form prior mixture: the transition integrated against q(theta' | u).
/// Only defined where the transition is conjugate to the proposal; the
/// primary template marks the combination as unavailable.
template <class M, class P>
struct ClosedFormTransition {
  static constexpr bool available = false;
};

/// Linear-Gaussian model with Gaussian pair: rho' ~ N(u_rho, s) integrates
/// exactly, giving N(x; u_rho x_{t-1}, v + s x_{t-1}^2). The transition
/// variance v is not conjugate and is fixed at the index-prior mean of
/// sigma2_x. At t = 0 the stationary law is not conjugate in rho either and
/// the prior mixture is used instead.
template <>
struct ClosedFormTransition<LinearGaussianSSM, GaussianProposalPair> {
  static constexpr bool available = true;

  ClosedFormTransition(const GaussianProposalPair& pair, const Eigen::Vector3d& u,
                       std::span<const ThetaVector> thetas, std::span<const double> prior_logw)
      : rho_mean(u[0]), rho_var(pair.rho_variance()) {
    double acc = 0.0;
    for (std::size_t l = 0; l < thetas.size(); ++l)
      if (prior_logw[l] > kNegInf) acc += std::exp(prior_logw[l]) * thetas[l].sigma2_x;
    var_x = acc;
  }

  template <class Rng>
  double sample(double prev, Rng& rng) const {
    return rho_mean * prev + std::sqrt(var_x + rho_var * prev * prev) * rng.normal();
  }
  double log_density(double prev, double x) const {
    return log_normal_pdf(x, rho_mean * prev, var_x + rho_var * prev * prev);
  }

  double rho_mean, rho_var, var_x;
};

/// Marginalised Feynman-Kac model (carry = per-parameter path-density cache).
template <MarkovModel M, ProposalPair P>
class MarginalFeynmanKac {
 public:
  using param_type = typename M::param_type;
  using closed_form_type = ClosedFormTransition<M, P>;

  MarginalFeynmanKac(const M& model, std::span<const param_type> thetas, const P& pair,
                     const typename P::u_type& u, const IndexPosterior& prior,
                     MixtureVariant variant)
      : model_(&model),
        thetas_(thetas.begin(), thetas.end()),
        prior_(prior),
        params_(model, thetas, prior.log_weights),
        variant_(variant),
        w_(thetas.size()),
        v_(thetas.size()),
        lp_(thetas.size()) {
    if (prior.size() != thetas.size())
      throw std::invalid_argument("MarginalFeynmanKac: prior/parameter size mismatch");
    if (variant == MixtureVariant::kClosedFormPriorMixture) {
      if constexpr (closed_form_type::available) {
        closed_form_.emplace_back(pair, u, thetas, prior.log_weights);
      } else {
        throw ConfigError("closed-form prior mixture is not available for this model/proposal");
      }
    }
  }

  std::size_t horizon() const { return model_->horizon(); }
  std::size_t carry_width() const { return thetas_.size(); }
  std::span<const double> initial_carry() const { return prior_.log_weights; }
  const ParameterSet<M>& parameters() const { return params_; }
  const IndexPosterior& prior() const { return prior_; }
  MixtureVariant variant() const { return variant_; }

  template <class Rng>
  double propose(std::size_t t, const PathView& parent, std::span<const double> parent_carry,
                 Rng& rng) const {
    const double prev = t > 0 ? parent.back() : 0.0;
    if (variant_ == MixtureVariant::kClosedFormPriorMixture && t > 0) {
      if constexpr (closed_form_type::available) return closed_form_.front().sample(prev, rng);
    }
    const auto& mix = (variant_ == MixtureVariant::kPosteriorMixture) ? parent_carry
                                                                       : std::span<const double>(prior_.log_weights);
    const std::size_t m = pick_component(mix, rng);
    const auto& b = params_.bound(m);
    return b.sample_transition(t, PathView::markov_window(t, prev, prev), rng);
  }

  /// Log marginal potential log eta_t - log q_t, and the updated cache.
  double weigh(std::size_t t, const PathView& path, std::span<const double> parent_carry,
               std::span<double> out) const {
    const double x = path.back();
    const double prev = t > 0 ? path[t - 1] : 0.0;
    const std::size_t L = thetas_.size();
    for (std::size_t l = 0; l < L; ++l) {
      if (!params_.active(l)) {
        out[l] = kNegInf;
        lp_[l] = kNegInf;
        continue;
      }
      const auto& b = params_.bound(l);
      lp_[l] = detail::log_trans(b, t, prev, x);
      out[l] = (lp_[l] == kNegInf || parent_carry[l] == kNegInf)
                   ? kNegInf
                   : parent_carry[l] + lp_[l] + detail::log_pot(b, t, prev, x);
    }
    const double log_num = log_sum_exp(out);
    if (log_num == kNegInf) return kNegInf;
    return log_num - log_proposal_density(t, prev, x, parent_carry);
  }

  // Log-density of the proposal actually sampled from, offset by the parent
  // normaliser log sum_l exp(parent_carry_l), which cancels against eta_t.
  // Reads the component transition densities left in lp_ by weigh().
  double log_proposal_density(std::size_t t, double prev, double x,
                              std::span<const double> parent_carry) const {
    const std::size_t L = thetas_.size();
    switch (variant_) {
      case MixtureVariant::kPosteriorMixture:
        for (std::size_t l = 0; l < L; ++l)
          v_[l] = lp_[l] == kNegInf ? kNegInf : parent_carry[l] + lp_[l];
        return log_sum_exp(v_);
      case MixtureVariant::kClosedFormPriorMixture:
        if (t > 0) {
          if constexpr (closed_form_type::available)
            return closed_form_.front().log_density(prev, x) + log_sum_exp(parent_carry);
        }
        [[fallthrough]];
      case MixtureVariant::kPriorMixture:
        for (std::size_t l = 0; l < L; ++l)
          v_[l] = (prior_.log_weights[l] == kNegInf || lp_[l] == kNegInf)
                      ? kNegInf
                      : prior_.log_weights[l] + lp_[l];
        return log_sum_exp(v_) + log_sum_exp(parent_carry);
    }
    return kNegInf;
  }

 private:
  template <class Rng>
  std::size_t pick_component(std::span<const double> logw, Rng& rng) const {
    normalize_log_weights(logw, w_);
    std::size_t positive = 0, last = 0;
    for (std::size_t l = 0; l < w_.size(); ++l)
      if (w_[l] > 0.0) {
        ++positive;
        last = l;
      }
    if (positive == 1) return last;
    return draw_index(rng, std::span<const double>(w_));
  }

  const M* model_;
  std::vector<param_type> thetas_;
  IndexPosterior prior_;
  ParameterSet<M> params_;
  MixtureVariant variant_;
  std::vector<closed_form_type> closed_form_;
  mutable std::vector<double> w_, v_, lp_;
};

/// Backward ratio for the marginalised model using the forward cache:
///   log sum_l exp(alpha^n_{t,l} + link^n_l + B_l) - log sum_l exp(alpha^n_{t,l}),
/// where link^n_l is the (t+1) increment from x^n_t to x'_{t+1} under theta^l and
/// B_l accumulates the increments of the already-selected tail x'_{t+1:T}.
/// O(N M) per step.
template <MarkovModel M>
class MarginalRatioEvaluator {
 public:
  explicit MarginalRatioEvaluator(const ParameterSet<M>& params) : params_(&params) {}

  void begin(const ParticleSystem& ps, std::size_t) {
    const std::size_t L = params_->size();
    tail_.assign(L, 0.0);
    links_.resize(ps.num_particles() * L);
    v_.resize(L);
  }

  void log_ratios(const ParticleSystem& ps, std::size_t t, std::span<const double> tail,
                  std::span<double> out) {
    const std::size_t L = params_->size();
    const double next = tail[0];
    for (std::size_t n = 0; n < ps.num_particles(); ++n) {
      const auto alpha = ps.carry(t, n);
      const double xn = ps.state(t, n);
      double* link = links_.data() + n * L;
      for (std::size_t l = 0; l < L; ++l) {
        if (alpha[l] == kNegInf || tail_[l] == kNegInf || !params_->active(l)) {
          link[l] = kNegInf;
          v_[l] = kNegInf;
          continue;
        }
        const auto& b = params_->bound(l);
        const double lp = detail::log_trans(b, t + 1, xn, next);
        link[l] = lp == kNegInf ? kNegInf : lp + detail::log_pot(b, t + 1, xn, next);
        v_[l] = link[l] == kNegInf ? kNegInf : alpha[l] + link[l] + tail_[l];
      }
      const double num = log_sum_exp(v_);
      out[n] = num == kNegInf ? kNegInf : num - log_sum_exp(alpha);
    }
  }

  void select(const ParticleSystem&, std::size_t, std::size_t k) {
    const std::size_t L = params_->size();
    for (std::size_t l = 0; l < L; ++l) {
      const double link = links_[k * L + l];
      tail_[l] = (link == kNegInf || tail_[l] == kNegInf) ? kNegInf : tail_[l] + link;
    }
  }

  /// Current tail log-densities B_l.
  std::span<const double> tail_log_density() const { return tail_; }

 private:
  const ParameterSet<M>* params_;
  std::vector<double> tail_, links_, v_;
};

/// pi_T(l | x_{0:T}, u, theta^{1:M}): index prior followed by one update per step.
template <MarkovModel M, ProposalPair P>
IndexPosterior terminal_index_distribution(std::span<const double> traj,
                                           std::span<const typename M::param_type> thetas,
                                           const typename P::u_type& u, const P& pair,
                                           const M& model) {
  IndexPosterior post = index_prior(u, thetas, pair, model);
  const ParameterSet<M> params(model, thetas, post.log_weights);
  for (std::size_t t = 0; t < traj.size(); ++t)
    post = update_index_posterior(post, t, t > 0 ? traj[t - 1] : 0.0, traj[t], params);
  return post;
}

}  // namespace pmcmc
