#pragma once

// Seedable random streams and categorical / multinomial sampling.
//
// Every kernel in the library is templated on its random source. The
// production source is RngStream; tests substitute sources that enumerate
// discrete choices. Two customisation points route discrete draws:
// draw_index() and draw_bernoulli() use a source's own `categorical` /
// `bernoulli` members when present and fall back to inverse-CDF sampling on
// `uniform()` otherwise.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace pmcmc {

/// Which consumer a stream feeds. Adding a consumer never perturbs the draws
/// of the others.
enum class StreamPurpose : std::uint64_t {
  kSmc = 1,         // particle propagation, resampling, backward sampling
  kProposal = 2,    // parameter proposals and accept/reject uniforms
  kSelection = 3,   // index selection in m-PGibbs
  kData = 4,        // synthetic data generation
};

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x9e3779b9u};
    engine_.seed(seq);
  }

  RngStream(std::uint64_t seed, StreamPurpose purpose)
      : RngStream(seed, static_cast<std::uint64_t>(purpose)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  /// Uniform on [0, 1).
  double uniform() { return unif_(engine_); }
  double normal() { return norm_(engine_); }
  double normal(double mean, double sd) { return mean + sd * norm_(engine_); }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

/// Random source with continuous draws.
template <class R>
concept UniformSource = requires(R& r) {
  { r.uniform() } -> std::convertible_to<double>;
};

template <class R>
concept CategoricalSource = requires(R& r, std::span<const double> w) {
  { r.categorical(w) } -> std::convertible_to<std::size_t>;
};

namespace detail {

/// Inverse CDF with the strict `u < cum` rule; rounding slack at the top end
/// lands on the last positive-weight index.
inline std::size_t inverse_cdf(std::span<const double> w, double u) {
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) last_positive = i;
    cum += w[i];
    if (u < cum) return i;
  }
  return last_positive;
}

}  // namespace detail

/// Unchecked categorical draw from normalised probabilities.
template <class Rng>
std::size_t draw_index(Rng& rng, std::span<const double> w) {
  if constexpr (CategoricalSource<Rng>) {
    return rng.categorical(w);
  } else {
    return detail::inverse_cdf(w, rng.uniform());
  }
}

/// True with probability p (p is clamped to [0, 1]).
template <class Rng>
bool draw_bernoulli(Rng& rng, double p) {
  p = std::clamp(p, 0.0, 1.0);
  if constexpr (requires { { rng.bernoulli(p) } -> std::convertible_to<bool>; }) {
    return rng.bernoulli(p);
  } else {
    return rng.uniform() < p;
  }
}

/// Throws std::invalid_argument unless w is nonnegative and sums to 1.
void validate_simplex(std::span<const double> w, double tol = 1e-12);

/// Checked categorical draw.
template <class Rng>
std::size_t sample_categorical(std::span<const double> w, Rng& rng) {
  validate_simplex(w);
  return draw_index(rng, w);
}

/// `count` independent categorical draws, written into `out`. Unchecked.
template <class Rng>
void draw_multinomial(std::span<const double> w, std::span<std::uint32_t> out, Rng& rng,
                      std::vector<double>& cumulative) {
  if constexpr (CategoricalSource<Rng>) {
    for (auto& a : out) a = static_cast<std::uint32_t>(rng.categorical(w));
  } else {
    cumulative.resize(w.size());
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      cum += w[i];
      cumulative[i] = cum;
      if (w[i] > 0.0) last_positive = i;
    }
    for (auto& a : out) {
      const double u = rng.uniform();
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const auto idx = static_cast<std::size_t>(it - cumulative.begin());
      a = static_cast<std::uint32_t>(idx < w.size() && w[idx] > 0.0 ? idx : last_positive);
    }
  }
}

/// Multinomial resampling: `count` conditionally independent ancestor indices.
template <class Rng>
std::vector<std::uint32_t> multinomial_ancestors(std::span<const double> w, std::size_t count,
                                                 Rng& rng) {
  if (count == 0) throw std::invalid_argument("multinomial_ancestors: count must be positive");
  validate_simplex(w);
  std::vector<std::uint32_t> out(count);
  std::vector<double> scratch;
  draw_multinomial(w, std::span<std::uint32_t>(out), rng, scratch);
  return out;
}

/// Streams for one chain: one per purpose.
struct ChainStreams {
  RngStream smc;
  RngStream proposal;
  RngStream selection;

  explicit ChainStreams(std::uint64_t seed)
      : smc(seed, StreamPurpose::kSmc),
        proposal(seed, StreamPurpose::kProposal),
        selection(seed, StreamPurpose::kSelection) {}
};

/// Non-owning view over the random sources a kernel consumes. The sources may
/// alias (enumeration oracles pass one object three times).
template <class Rng>
struct RngSet {
  Rng& smc;
  Rng& proposal;
  Rng& selection;
};

inline RngSet<RngStream> streams_of(ChainStreams& s) { return {s.smc, s.proposal, s.selection}; }

template <class Rng>
RngSet<Rng> single_source(Rng& r) {
  return {r, r, r};
}

}  // namespace pmcmc
