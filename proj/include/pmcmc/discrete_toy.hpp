#pragma once

// Finite-state model over a finite parameter grid. Small enough that every
// kernel built on it can be written out as an explicit transition matrix.
// States are the integers 0..K-1 stored as doubles.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pmcmc/model.hpp"
#include "pmcmc/numeric.hpp"
#include "pmcmc/rng.hpp"

namespace pmcmc {

struct ToyParameters {
  std::vector<double> initial;     // K
  std::vector<double> transition;  // K x K, row-major, rows sum to 1
  std::vector<double> emission;    // K x S nonnegative weights g(x, y)
};

class DiscreteToySSM {
 public:
  using param_type = std::size_t;  // index into the parameter grid
  static constexpr bool is_markov = true;

  class Bound {
   public:
    Bound(const DiscreteToySSM& m, std::size_t g)
        : m_(&m), p_(&m.grid_.at(g)), symbols_(p_->emission.size() / m.K_) {}

    double log_transition(std::size_t t, const PathView& hist, double x) const {
      return log_transition_from(t, t == 0 ? 0.0 : hist.back(), x);
    }
    double log_transition_from(std::size_t t, double prev, double x) const {
      const auto j = static_cast<std::size_t>(x);
      if (t == 0) return std::log(p_->initial[j]);
      return std::log(p_->transition[static_cast<std::size_t>(prev) * m_->K_ + j]);
    }
    double log_potential(std::size_t t, const PathView& path) const {
      return log_observation(t, path.back());
    }
    double log_observation(std::size_t t, double x) const {
      const auto k = static_cast<std::size_t>(x);
      return std::log(p_->emission[k * symbols_ + static_cast<std::size_t>(m_->observations_[t])]);
    }
    template <class Rng>
    double sample_transition(std::size_t t, const PathView& hist, Rng& rng) const {
      return sample_from(t, t == 0 ? 0.0 : hist.back(), rng);
    }
    template <class Rng>
    double sample_from(std::size_t t, double prev, Rng& rng) const {
      if (t == 0) return static_cast<double>(draw_index(rng, std::span<const double>(p_->initial)));
      const auto row = std::span<const double>(p_->transition)
                           .subspan(static_cast<std::size_t>(prev) * m_->K_, m_->K_);
      return static_cast<double>(draw_index(rng, row));
    }

   private:
    const DiscreteToySSM* m_;
    const ToyParameters* p_;
    std::size_t symbols_;
  };

  /// `prior` is a probability vector over `grid`.
  DiscreteToySSM(std::size_t num_states, std::vector<int> observations,
                 std::vector<ToyParameters> grid, std::vector<double> prior);

  std::size_t horizon() const noexcept { return observations_.size() - 1; }
  std::size_t num_states() const noexcept { return K_; }
  std::size_t grid_size() const noexcept { return grid_.size(); }
  const ToyParameters& parameters(std::size_t g) const { return grid_.at(g); }

  double log_prior(std::size_t g) const { return g < grid_.size() ? log_prior_[g] : kNegInf; }
  bool in_support(std::size_t g) const { return g < grid_.size() && log_prior_[g] > kNegInf; }
  Bound bind(std::size_t g) const { return Bound(*this, g); }

  /// Exact log Z_T(theta_g) by the forward recursion.
  double log_marginal_likelihood(std::size_t g) const;

 private:
  std::size_t K_;
  std::vector<int> observations_;
  std::vector<ToyParameters> grid_;
  std::vector<double> log_prior_;
};

}  // namespace pmcmc
