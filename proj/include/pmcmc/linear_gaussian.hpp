#pragma once

// Scalar AR(1) state-space model observed in Gaussian noise:
//
//   x_0 ~ N(0, v0(theta)),  x_t | x_{t-1} ~ N(rho x_{t-1}, sigma2_x),  y_t | x_t ~ N(x_t, sigma2_y)
//
// with v0 = sigma2_x / (1 - rho^2) in stationary mode (sigma2_x when |rho| = 1)
// and v0 = sigma2_x in fixed-variance mode.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pmcmc/model.hpp"
#include "pmcmc/numeric.hpp"

namespace pmcmc {

struct ThetaVector {
  double rho = 0.0;
  double sigma2_x = 1.0;
  double sigma2_y = 1.0;

  Eigen::Vector3d vec() const { return {rho, sigma2_x, sigma2_y}; }
  static ThetaVector from(const Eigen::Ref<const Eigen::Vector3d>& v) { return {v[0], v[1], v[2]}; }

  bool operator==(const ThetaVector&) const = default;
};

/// Support of the uniform / inverse-gamma prior.
inline bool in_prior_support(const ThetaVector& th) {
  return th.rho >= -1.0 && th.rho <= 1.0 && th.sigma2_x > 0.0 && th.sigma2_y > 0.0 &&
         std::isfinite(th.sigma2_x) && std::isfinite(th.sigma2_y);
}

/// rho ~ U[-1, 1], sigma2_x ~ IG(2, 2), sigma2_y ~ IG(2, 2).
inline double log_prior(const ThetaVector& th) {
  if (!in_prior_support(th)) return kNegInf;
  return std::log(0.5) + log_inverse_gamma_pdf(th.sigma2_x, 2.0, 2.0) +
         log_inverse_gamma_pdf(th.sigma2_y, 2.0, 2.0);
}

enum class InitialMode { kStationary, kFixedVariance };

InitialMode parse_initial_mode(const std::string& s);
std::string to_string(InitialMode m);

/// Variance of x_0 under theta.
inline double initial_variance(const ThetaVector& th, InitialMode mode) {
  if (mode == InitialMode::kStationary && std::abs(th.rho) < 1.0)
    return th.sigma2_x / (1.0 - th.rho * th.rho);
  return th.sigma2_x;
}

class LinearGaussianSSM {
 public:
  using param_type = ThetaVector;
  static constexpr bool is_markov = true;

  /// Densities at one parameter value, with the log-normalisers precomputed.
  class Bound {
   public:
    Bound(const LinearGaussianSSM& m, const ThetaVector& th)
        : y_(m.observations_.data()),
          rho_(th.rho),
          var_x_(th.sigma2_x),
          var_y_(th.sigma2_y),
          var0_(pmcmc::initial_variance(th, m.mode_)),
          c_x_(-0.5 * (kLogTwoPi + std::log(th.sigma2_x))),
          c_y_(-0.5 * (kLogTwoPi + std::log(th.sigma2_y))),
          c0_(-0.5 * (kLogTwoPi + std::log(var0_))) {}

    double log_transition(std::size_t t, const PathView& hist, double x) const {
      if (t == 0) return c0_ - 0.5 * x * x / var0_;
      return log_transition_from(t, hist.back(), x);
    }
    double log_transition_from(std::size_t t, double prev, double x) const {
      if (t == 0) return c0_ - 0.5 * x * x / var0_;
      const double d = x - rho_ * prev;
      return c_x_ - 0.5 * d * d / var_x_;
    }
    double log_potential(std::size_t t, const PathView& path) const {
      return log_observation(t, path.back());
    }
    double log_observation(std::size_t t, double x) const {
      const double d = y_[t] - x;
      return c_y_ - 0.5 * d * d / var_y_;
    }
    template <class Rng>
    double sample_transition(std::size_t t, const PathView& hist, Rng& rng) const {
      if (t == 0) return std::sqrt(var0_) * rng.normal();
      return sample_from(t, hist.back(), rng);
    }
    template <class Rng>
    double sample_from(std::size_t t, double prev, Rng& rng) const {
      if (t == 0) return std::sqrt(var0_) * rng.normal();
      return rho_ * prev + std::sqrt(var_x_) * rng.normal();
    }

    double rho() const noexcept { return rho_; }
    double transition_variance() const noexcept { return var_x_; }
    double initial_variance() const noexcept { return var0_; }

   private:
    const double* y_;
    double rho_, var_x_, var_y_, var0_;
    double c_x_, c_y_, c0_;
  };

  LinearGaussianSSM(std::vector<double> observations,
                    InitialMode mode = InitialMode::kStationary);

  std::size_t horizon() const noexcept { return observations_.size() - 1; }
  std::span<const double> observations() const noexcept { return observations_; }
  InitialMode initial_mode() const noexcept { return mode_; }

  double log_prior(const ThetaVector& th) const { return pmcmc::log_prior(th); }
  bool in_support(const ThetaVector& th) const { return in_prior_support(th); }
  Bound bind(const ThetaVector& th) const { return Bound(*this, th); }

 private:
  std::vector<double> observations_;
  InitialMode mode_;
};

/// Simulates (x_{0:T}, y_{0:T}) from the model at theta.
template <class Rng>
std::pair<Trajectory, std::vector<double>> simulate_linear_gaussian(
    const ThetaVector& th, std::size_t horizon, Rng& rng,
    InitialMode mode = InitialMode::kStationary) {
  Trajectory x(horizon + 1);
  std::vector<double> y(horizon + 1);
  x[0] = std::sqrt(initial_variance(th, mode)) * rng.normal();
  for (std::size_t t = 1; t <= horizon; ++t)
    x[t] = th.rho * x[t - 1] + std::sqrt(th.sigma2_x) * rng.normal();
  for (std::size_t t = 0; t <= horizon; ++t) y[t] = x[t] + std::sqrt(th.sigma2_y) * rng.normal();
  return {std::move(x), std::move(y)};
}

}  // namespace pmcmc
