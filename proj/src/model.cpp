#include <cmath>
#include <stdexcept>

#include "pmcmc/discrete_toy.hpp"
#include "pmcmc/linear_gaussian.hpp"
#include "pmcmc/model.hpp"

namespace pmcmc {

void validate_trajectory(std::span<const double> states) {
  if (states.empty()) throw std::invalid_argument("trajectory: empty");
  for (double x : states)
    if (!std::isfinite(x)) throw std::invalid_argument("trajectory: non-finite state");
}

InitialMode parse_initial_mode(const std::string& s) {
  if (s == "stationary") return InitialMode::kStationary;
  if (s == "fixed-variance") return InitialMode::kFixedVariance;
  throw ConfigError("unknown initial mode '" + s + "'");
}

std::string to_string(InitialMode m) {
  return m == InitialMode::kStationary ? "stationary" : "fixed-variance";
}

LinearGaussianSSM::LinearGaussianSSM(std::vector<double> observations, InitialMode mode)
    : observations_(std::move(observations)), mode_(mode) {
  if (observations_.empty()) throw std::invalid_argument("LinearGaussianSSM: no observations");
  for (double y : observations_)
    if (!std::isfinite(y)) throw std::invalid_argument("LinearGaussianSSM: non-finite observation");
}

DiscreteToySSM::DiscreteToySSM(std::size_t num_states, std::vector<int> observations,
                               std::vector<ToyParameters> grid, std::vector<double> prior)
    : K_(num_states),
      observations_(std::move(observations)),
      grid_(std::move(grid)),
      log_prior_(prior.size()) {
  if (K_ == 0) throw std::invalid_argument("DiscreteToySSM: K must be positive");
  if (observations_.empty()) throw std::invalid_argument("DiscreteToySSM: no observations");
  if (grid_.empty() || prior.size() != grid_.size())
    throw std::invalid_argument("DiscreteToySSM: grid/prior size mismatch");
  validate_simplex(prior, 1e-12);
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    log_prior_[g] = std::log(prior[g]);
    const auto& p = grid_[g];
    if (p.initial.size() != K_ || p.transition.size() != K_ * K_)
      throw std::invalid_argument("DiscreteToySSM: parameter dimension mismatch");
    validate_simplex(p.initial, 1e-12);
    for (std::size_t i = 0; i < K_; ++i)
      validate_simplex(std::span<const double>(p.transition).subspan(i * K_, K_), 1e-12);
    if (p.emission.size() % K_ != 0) throw std::invalid_argument("DiscreteToySSM: emission size");
    const std::size_t num_symbols = p.emission.size() / K_;
    for (int y : observations_)
      if (y < 0 || static_cast<std::size_t>(y) >= num_symbols)
        throw std::invalid_argument("DiscreteToySSM: observation symbol out of range");
  }
}

double DiscreteToySSM::log_marginal_likelihood(std::size_t g) const {
  const auto& p = grid_.at(g);
  const std::size_t S = p.emission.size() / K_;
  std::vector<double> alpha(K_), next(K_);
  for (std::size_t k = 0; k < K_; ++k) alpha[k] = p.initial[k] * p.emission[k * S + observations_[0]];
  double log_z = 0.0;
  auto rescale = [&](std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v;
    if (s <= 0.0) return false;
    for (double& v : a) v /= s;
    log_z += std::log(s);
    return true;
  };
  if (!rescale(alpha)) return kNegInf;
  for (std::size_t t = 1; t < observations_.size(); ++t) {
    for (std::size_t j = 0; j < K_; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < K_; ++i) acc += alpha[i] * p.transition[i * K_ + j];
      next[j] = acc * p.emission[j * S + observations_[t]];
    }
    alpha.swap(next);
    if (!rescale(alpha)) return kNegInf;
  }
  return log_z;
}

}  // namespace pmcmc
