#pragma once

// Model abstractions: trajectories, path views and the ParametricModel
// concept describing
//
//   gamma_t(x_{0:t} | theta) = p_t(x_t | x_{0:t-1}, theta) g_t(x_{0:t}; theta) pi_{t-1}(x_{0:t-1} | theta).
//
// A model exposes its per-parameter densities through `bind(theta)`, which
// returns a lightweight object with precomputed constants. Densities receive
// the path through a PathView so that non-Markovian models can read the
// whole history while Markov models touch only the last one or two entries.

#include <cassert>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pmcmc/numeric.hpp"
#include "pmcmc/rng.hpp"

namespace pmcmc {

/// States x_{0:T}; index 0..T.
using Trajectory = std::vector<double>;

void validate_trajectory(std::span<const double> states);

/// Particle genealogy: row-major (T+1) x N states and ancestor indices.
/// ancestors[t * N + n] is the index at t-1 of particle n's parent (row 0 unused).
struct Genealogy {
  std::size_t num_particles = 0;
  std::span<const double> states;
  std::span<const std::uint32_t> ancestors;
};

/// Read-only view of a path x_{0:size-1}.
///
/// Three representations: a contiguous array; the lineage of a particle
/// (optionally continued by a tail x'_{t+1:...}); and a Markov window that
/// only knows its last two entries.
class PathView {
 public:
  PathView() = default;

  static PathView contiguous(std::span<const double> xs) {
    PathView v;
    v.kind_ = Kind::kContiguous;
    v.data_ = xs;
    v.size_ = xs.size();
    return v;
  }

  /// Lineage of particle n at time t, followed by `tail` at positions t+1...
  static PathView lineage(const Genealogy& g, std::size_t t, std::size_t n,
                          std::span<const double> tail = {}) {
    PathView v;
    v.kind_ = Kind::kLineage;
    v.gen_ = &g;
    v.t_ = t;
    v.n_ = n;
    v.data_ = tail;
    v.size_ = t + 1 + tail.size();
    return v;
  }

  /// Path of logical length `size` whose last two entries are prev, last.
  /// Only valid for Markov models (they never look further back).
  static PathView markov_window(std::size_t size, double prev, double last) {
    PathView v;
    v.kind_ = Kind::kWindow;
    v.size_ = size;
    v.prev_ = prev;
    v.last_ = last;
    return v;
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  double operator[](std::size_t s) const {
    assert(s < size_);
    switch (kind_) {
      case Kind::kContiguous:
        return data_[s];
      case Kind::kWindow:
        assert(s + 2 >= size_);
        return s + 1 == size_ ? last_ : prev_;
      case Kind::kLineage:
        break;
    }
    if (s > t_) return data_[s - t_ - 1];
    std::size_t n = n_;
    const std::size_t N = gen_->num_particles;
    for (std::size_t t = t_; t > s; --t) n = gen_->ancestors[t * N + n];
    return gen_->states[s * N + n];
  }

  double back() const { return (*this)[size_ - 1]; }

  /// First `len` entries of this path.
  PathView prefix(std::size_t len) const {
    assert(len <= size_);
    if (len == 0) return PathView{};
    PathView v = *this;
    v.size_ = len;
    if (kind_ == Kind::kContiguous) {
      v.data_ = data_.first(len);
    } else if (kind_ == Kind::kLineage && len <= t_ + 1) {
      std::size_t n = n_;
      const std::size_t N = gen_->num_particles;
      for (std::size_t t = t_; t + 1 > len; --t) n = gen_->ancestors[t * N + n];
      v.t_ = len - 1;
      v.n_ = n;
      v.data_ = {};
    } else if (kind_ == Kind::kLineage) {
      v.data_ = data_.first(len - t_ - 1);
    } else {
      assert(len >= size_ - 1);
      if (len + 1 == size_) {
        v.last_ = prev_;
        v.prev_ = std::nan("");
      }
    }
    return v;
  }

 private:
  enum class Kind : std::uint8_t { kContiguous, kLineage, kWindow };
  Kind kind_ = Kind::kContiguous;
  std::size_t size_ = 0;
  std::span<const double> data_{};
  const Genealogy* gen_ = nullptr;
  std::size_t t_ = 0;
  std::size_t n_ = 0;
  double prev_ = 0.0;
  double last_ = 0.0;
};

/// Densities of a model at one fixed parameter value.
///   log_transition(t, history, x): log p_t(x | history), history = x_{0:t-1}
///   log_potential(t, path):        log g_t(path),         path = x_{0:t}
///   sample_transition(t, history, rng)
template <class B>
concept BoundModel = requires(const B& b, std::size_t t, const PathView& p, double x,
                              RngStream& rng) {
  { b.log_transition(t, p, x) } -> std::convertible_to<double>;
  { b.log_potential(t, p) } -> std::convertible_to<double>;
  { b.sample_transition(t, p, rng) } -> std::convertible_to<double>;
};

template <class M>
concept ParametricModel = requires(const M& m, const typename M::param_type& theta) {
  typename M::param_type;
  { M::is_markov } -> std::convertible_to<bool>;
  { m.horizon() } -> std::convertible_to<std::size_t>;
  { m.log_prior(theta) } -> std::convertible_to<double>;
  { m.in_support(theta) } -> std::convertible_to<bool>;
  { m.bind(theta) } -> BoundModel;
};

/// Markov models (transition depends on x_{t-1} only, potential on x_{t-1:t}).
template <class M>
concept MarkovModel = ParametricModel<M> && M::is_markov;

template <ParametricModel M>
using bound_t = decltype(std::declval<const M&>().bind(std::declval<const typename M::param_type&>()));

/// log p_t(x_t | x_{0:t-1}) + log g_t(x_{0:t}) for the last entry of `path`.
template <BoundModel B>
double log_increment(const B& b, std::size_t t, const PathView& path) {
  const double lp = b.log_transition(t, path.prefix(t), path[t]);
  if (lp == kNegInf) return kNegInf;
  return lp + b.log_potential(t, path);
}

/// log gamma_t(x_{0:t} | theta) = sum_{s<=t} [log p_s + log g_s], prior excluded.
template <ParametricModel M>
double log_gamma(const M& model, std::span<const double> traj,
                 const typename M::param_type& theta, std::size_t t) {
  if (t > model.horizon()) throw std::out_of_range("log_gamma: t exceeds horizon");
  if (traj.size() < t + 1) throw std::invalid_argument("log_gamma: trajectory too short");
  validate_trajectory(traj.first(t + 1));
  const auto b = model.bind(theta);
  const auto path = PathView::contiguous(traj.first(t + 1));
  double acc = 0.0;
  for (std::size_t s = 0; s <= t; ++s) {
    acc += log_increment(b, s, path.prefix(s + 1));
    if (acc == kNegInf) break;
  }
  return acc;
}

}  // namespace pmcmc
