#pragma once

// Parameter proposals: single-step random walks q(theta' | theta) and the
// auxiliary-variable pairs q(u | theta), q(theta' | u) used by m-PGibbs.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pmcmc/linear_gaussian.hpp"
#include "pmcmc/numeric.hpp"
#include "pmcmc/rng.hpp"

namespace pmcmc {

/// Independent Gaussian with diagonal covariance. Zero-variance coordinates
/// are held fixed: they contribute a point mass (0 or -inf in log-density).
class DiagGaussian {
 public:
  explicit DiagGaussian(Eigen::Vector3d variances) : var_(std::move(variances)) {
    for (int i = 0; i < 3; ++i)
      if (!(var_[i] >= 0.0)) throw ConfigError("proposal variances must be nonnegative");
    for (int i = 0; i < 3; ++i)
      log_norm_[i] = var_[i] > 0.0 ? -0.5 * (kLogTwoPi + std::log(var_[i])) : 0.0;
  }

  template <class Rng>
  Eigen::Vector3d sample(const Eigen::Vector3d& mean, Rng& rng) const {
    Eigen::Vector3d out = mean;
    for (int i = 0; i < 3; ++i)
      if (var_[i] > 0.0) out[i] += std::sqrt(var_[i]) * rng.normal();
    return out;
  }

  double log_density(const Eigen::Vector3d& x, const Eigen::Vector3d& mean) const {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double d = x[i] - mean[i];
      if (var_[i] > 0.0)
        acc += log_norm_[i] - 0.5 * d * d / var_[i];
      else if (d != 0.0)
        return kNegInf;
    }
    return acc;
  }

  const Eigen::Vector3d& variances() const noexcept { return var_; }

 private:
  Eigen::Vector3d var_;
  Eigen::Vector3d log_norm_;
};

/// q(theta' | theta) = N(theta, tau * diag(scale)).
class GaussianRandomWalk {
 public:
  explicit GaussianRandomWalk(double tau, const Eigen::Vector3d& scale = Eigen::Vector3d::Ones())
      : tau_(tau), dist_(tau * scale) {}

  template <class Rng>
  ThetaVector sample(const ThetaVector& from, Rng& rng) const {
    return ThetaVector::from(dist_.sample(from.vec(), rng));
  }
  double log_density(const ThetaVector& to, const ThetaVector& from) const {
    return dist_.log_density(to.vec(), from.vec());
  }
  double tau() const noexcept { return tau_; }
  const Eigen::Vector3d& variances() const noexcept { return dist_.variances(); }

 private:
  double tau_;
  DiagGaussian dist_;
};

/// q(u | theta) = N(theta, C_u), q(theta' | u) = N(u, C_theta). The default
/// constructor splits a random walk of step delta and preconditioner Sigma
/// into two halves C_u = C_theta = (delta / 2) Sigma, which recovers
/// q(theta' | theta) = N(theta, delta Sigma) marginally.
class GaussianProposalPair {
 public:
  using param_type = ThetaVector;
  using u_type = Eigen::Vector3d;

  explicit GaussianProposalPair(double delta,
                                const Eigen::Vector3d& preconditioner = Eigen::Vector3d::Ones())
      : delta_(delta), q_u_(0.5 * delta * preconditioner), q_theta_(0.5 * delta * preconditioner) {}

  GaussianProposalPair(const Eigen::Vector3d& cov_u, const Eigen::Vector3d& cov_theta)
      : delta_(std::nan("")), q_u_(cov_u), q_theta_(cov_theta) {}

  template <class Rng>
  u_type sample_u(const ThetaVector& theta, Rng& rng) const {
    return q_u_.sample(theta.vec(), rng);
  }
  double log_q_u(const u_type& u, const ThetaVector& theta) const {
    return q_u_.log_density(u, theta.vec());
  }
  template <class Rng>
  ThetaVector sample_theta(const u_type& u, Rng& rng) const {
    return ThetaVector::from(q_theta_.sample(u, rng));
  }
  double log_q_theta(const ThetaVector& theta, const u_type& u) const {
    return q_theta_.log_density(theta.vec(), u);
  }

  /// Variance of rho under q(theta' | u).
  double rho_variance() const { return q_theta_.variances()[0]; }
  double delta() const noexcept { return delta_; }
  bool symmetric() const { return q_u_.variances() == q_theta_.variances(); }

 private:
  double delta_;
  DiagGaussian q_u_;
  DiagGaussian q_theta_;
};

/// Row-stochastic matrix over a finite set: q(j | i) = rows[i][j].
class GridProposal {
 public:
  explicit GridProposal(std::vector<std::vector<double>> rows);

  template <class Rng>
  std::size_t sample(std::size_t from, Rng& rng) const {
    return draw_index(rng, std::span<const double>(rows_.at(from)));
  }
  double log_density(std::size_t to, std::size_t from) const {
    return std::log(rows_.at(from).at(to));
  }
  std::size_t size() const noexcept { return rows_.size(); }

 private:
  std::vector<std::vector<double>> rows_;
};

/// Discrete auxiliary pair: u | theta ~ to_u[theta], theta' | u ~ to_theta[u].
class GridProposalPair {
 public:
  using param_type = std::size_t;
  using u_type = std::size_t;

  GridProposalPair(GridProposal to_u, GridProposal to_theta)
      : to_u_(std::move(to_u)), to_theta_(std::move(to_theta)) {}

  template <class Rng>
  u_type sample_u(std::size_t theta, Rng& rng) const {
    return to_u_.sample(theta, rng);
  }
  double log_q_u(u_type u, std::size_t theta) const { return to_u_.log_density(u, theta); }
  template <class Rng>
  std::size_t sample_theta(u_type u, Rng& rng) const {
    return to_theta_.sample(u, rng);
  }
  double log_q_theta(std::size_t theta, u_type u) const { return to_theta_.log_density(theta, u); }

 private:
  GridProposal to_u_;
  GridProposal to_theta_;
};

template <class P, class Theta>
concept RandomWalkProposal = requires(const P& p, const Theta& a, RngStream& rng) {
  { p.sample(a, rng) } -> std::convertible_to<Theta>;
  { p.log_density(a, a) } -> std::convertible_to<double>;
};

template <class P>
concept ProposalPair = requires(const P& p, const typename P::param_type& th,
                                const typename P::u_type& u, RngStream& rng) {
  { p.sample_u(th, rng) } -> std::convertible_to<typename P::u_type>;
  { p.log_q_u(u, th) } -> std::convertible_to<double>;
  { p.sample_theta(u, rng) } -> std::convertible_to<typename P::param_type>;
  { p.log_q_theta(th, u) } -> std::convertible_to<double>;
};

}  // namespace pmcmc
