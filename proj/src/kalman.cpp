#include "pmcmc/kalman.hpp"

#include <numeric>
#include <stdexcept>

namespace pmcmc {

double KalmanCache::log_likelihood() const {
  return std::accumulate(loglik_increments.begin(), loglik_increments.end(), 0.0);
}

KalmanCache kalman_filter(const ThetaVector& th, std::span<const double> y, InitialMode mode) {
  if (!in_prior_support(th)) throw std::invalid_argument("kalman_filter: theta outside support");
  if (y.empty()) throw std::invalid_argument("kalman_filter: no observations");
  const std::size_t n = y.size();
  KalmanCache kc;
  kc.pred_mean.resize(n);
  kc.pred_var.resize(n);
  kc.filt_mean.resize(n);
  kc.filt_var.resize(n);
  kc.loglik_increments.resize(n);

  double m = 0.0;
  double p = initial_variance(th, mode);
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      m = th.rho * m;
      p = th.rho * th.rho * p + th.sigma2_x;
    }
    kc.pred_mean[t] = m;
    kc.pred_var[t] = p;
    const double s = p + th.sigma2_y;
    kc.loglik_increments[t] = log_normal_pdf(y[t], m, s);
    const double gain = p / s;
    m += gain * (y[t] - m);
    p *= (1.0 - gain);
    kc.filt_mean[t] = m;
    kc.filt_var[t] = p;
  }
  return kc;
}

double kalman_loglik(const ThetaVector& th, std::span<const double> y, InitialMode mode) {
  if (!in_prior_support(th)) return kNegInf;
  return kalman_filter(th, y, mode).log_likelihood();
}

SmootherMoments smoother_moments(const ThetaVector& th, std::span<const double> y,
                                 InitialMode mode) {
  const KalmanCache kc = kalman_filter(th, y, mode);
  const std::size_t n = y.size();
  SmootherMoments sm{kc.filt_mean, kc.filt_var};
  for (std::size_t t = n - 1; t-- > 0;) {
    const double gain = kc.filt_var[t] * th.rho / kc.pred_var[t + 1];
    sm.mean[t] = kc.filt_mean[t] + gain * (sm.mean[t + 1] - kc.pred_mean[t + 1]);
    sm.var[t] = kc.filt_var[t] + gain * gain * (sm.var[t + 1] - kc.pred_var[t + 1]);
  }
  return sm;
}

}  // namespace pmcmc
