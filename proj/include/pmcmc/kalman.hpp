#pragma once

// Exact inference for LinearGaussianSSM: scalar Kalman filter, RTS smoother
// and forward-filtering backward-sampling.

#include <cmath>
#include <span>
#include <vector>

#include "pmcmc/linear_gaussian.hpp"
#include "pmcmc/model.hpp"

namespace pmcmc {

struct KalmanCache {
  std::vector<double> pred_mean, pred_var;      // x_t | y_{0:t-1}
  std::vector<double> filt_mean, filt_var;      // x_t | y_{0:t}
  std::vector<double> loglik_increments;        // log p(y_t | y_{0:t-1})

  double log_likelihood() const;
};

/// Throws std::invalid_argument outside the prior support.
KalmanCache kalman_filter(const ThetaVector& th, std::span<const double> y,
                          InitialMode mode = InitialMode::kStationary);

/// log p(y_{0:T} | theta); -inf outside the prior support.
double kalman_loglik(const ThetaVector& th, std::span<const double> y,
                     InitialMode mode = InitialMode::kStationary);

struct SmootherMoments {
  std::vector<double> mean;
  std::vector<double> var;
};

SmootherMoments smoother_moments(const ThetaVector& th, std::span<const double> y,
                                 InitialMode mode = InitialMode::kStationary);

/// Exact draw from p(x_{0:T} | y_{0:T}, theta).
template <class Rng>
Trajectory ffbs_sample(const ThetaVector& th, std::span<const double> y, Rng& rng,
                       InitialMode mode = InitialMode::kStationary) {
  const KalmanCache kc = kalman_filter(th, y, mode);
  const std::size_t T = y.size() - 1;
  Trajectory x(T + 1);
  x[T] = kc.filt_mean[T] + std::sqrt(kc.filt_var[T]) * rng.normal();
  for (std::size_t t = T; t-- > 0;) {
    const double gain = kc.filt_var[t] * th.rho / kc.pred_var[t + 1];
    const double mean = kc.filt_mean[t] + gain * (x[t + 1] - kc.pred_mean[t + 1]);
    const double var = kc.filt_var[t] - gain * th.rho * kc.filt_var[t];
    x[t] = mean + std::sqrt(std::max(var, 0.0)) * rng.normal();
  }
  return x;
}

}  // namespace pmcmc
