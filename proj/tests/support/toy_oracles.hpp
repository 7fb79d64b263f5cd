#pragma once

// Small discrete instances and their exact kernel matrices, computed by
// running the library kernels under ReplayRng.

#include <cmath>
#include <vector>

#include "enumeration.hpp"
#include "pmcmc/discrete_toy.hpp"
#include "pmcmc/proposals.hpp"
#include "pmcmc/samplers.hpp"

namespace pmcmc::testing {

inline constexpr std::size_t kToyStates = 2;

/// K = 2, three observations over two symbols, `grid_points` parameter sets.
inline DiscreteToySSM make_toy(std::size_t grid_points = 2, std::vector<int> obs = {0, 1, 1}) {
  std::vector<ToyParameters> grid;
  std::vector<double> prior;
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double a = 0.55 + 0.15 * static_cast<double>(g);
    const double e = 0.7 - 0.2 * static_cast<double>(g);
    grid.push_back({{0.6 - 0.1 * static_cast<double>(g), 0.4 + 0.1 * static_cast<double>(g)},
                    {a, 1.0 - a, 0.3, 0.7},
                    {e, 1.0 - e, 0.25, 0.75}});
    prior.push_back(static_cast<double>(g + 2));
  }
  double s = 0.0;
  for (double p : prior) s += p;
  for (double& p : prior) p /= s;
  return DiscreteToySSM(kToyStates, std::move(obs), std::move(grid), std::move(prior));
}

inline std::size_t num_paths(const DiscreteToySSM& m) {
  return static_cast<std::size_t>(std::pow(m.num_states(), m.horizon() + 1));
}

inline Trajectory path_of(const DiscreteToySSM& m, std::size_t idx) {
  Trajectory x(m.horizon() + 1);
  for (std::size_t t = 0; t < x.size(); ++t) {
    x[t] = static_cast<double>(idx % m.num_states());
    idx /= m.num_states();
  }
  return x;
}

inline std::size_t index_of(const DiscreteToySSM& m, std::span<const double> x) {
  std::size_t idx = 0;
  for (std::size_t t = x.size(); t-- > 0;) idx = idx * m.num_states() + static_cast<std::size_t>(x[t]);
  return idx;
}

/// Joint density of (x, y) written out from the raw tables.
inline double direct_path_density(const DiscreteToySSM& m, std::size_t g,
                                  std::span<const double> x, std::span<const int> obs) {
  const auto& p = m.parameters(g);
  const std::size_t K = m.num_states();
  const std::size_t S = p.emission.size() / K;
  double d = 1.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const auto k = static_cast<std::size_t>(x[t]);
    d *= t == 0 ? p.initial[k] : p.transition[static_cast<std::size_t>(x[t - 1]) * K + k];
    d *= p.emission[k * S + static_cast<std::size_t>(obs[t])];
  }
  return d;
}

/// Z(theta_g) by summing the joint over all paths.
inline double direct_evidence(const DiscreteToySSM& m, std::size_t g, std::span<const int> obs) {
  double z = 0.0;
  for (std::size_t i = 0; i < num_paths(m); ++i) z += direct_path_density(m, g, path_of(m, i), obs);
  return z;
}

inline std::vector<double> normalized(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
  return v;
}

/// pi(x | theta_g) over path indices.
inline std::vector<double> path_posterior(const DiscreteToySSM& m, std::size_t g,
                                          std::span<const int> obs) {
  std::vector<double> pi(num_paths(m));
  for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = direct_path_density(m, g, path_of(m, i), obs);
  return normalized(std::move(pi));
}

/// pi(g, x) over joint index g * paths + x.
inline std::vector<double> joint_posterior(const DiscreteToySSM& m, std::span<const int> obs) {
  const std::size_t P = num_paths(m);
  std::vector<double> pi(m.grid_size() * P);
  for (std::size_t g = 0; g < m.grid_size(); ++g)
    for (std::size_t i = 0; i < P; ++i)
      pi[g * P + i] = std::exp(m.log_prior(g)) * direct_path_density(m, g, path_of(m, i), obs);
  return normalized(std::move(pi));
}

/// pi(g) over the grid.
inline std::vector<double> parameter_posterior(const DiscreteToySSM& m, std::span<const int> obs) {
  std::vector<double> pi(m.grid_size());
  for (std::size_t g = 0; g < pi.size(); ++g)
    pi[g] = std::exp(m.log_prior(g)) * direct_evidence(m, g, obs);
  return normalized(std::move(pi));
}

/// Exact CSMC kernel matrix on paths at fixed theta_g.
inline std::vector<double> csmc_matrix(const DiscreteToySSM& m, std::size_t g,
                                       const CsmcConfig& cfg) {
  const std::size_t P = num_paths(m);
  std::vector<double> K(P * P, 0.0);
  for (std::size_t i = 0; i < P; ++i) {
    const Trajectory ref = path_of(m, i);
    ParticleSystem ps;
    enumerate([&](ReplayRng& r) { return csmc_kernel(m, g, ref, cfg, r, ps).trajectory; },
              [&](double p, const Trajectory& x) { K[i * P + index_of(m, x)] += p; });
  }
  return K;
}

/// Exact matrix of the exact-likelihood MH (or Barker) chain on the grid.
inline std::vector<double> ideal_matrix(const DiscreteToySSM& m, const GridProposal& q,
                                        bool barker) {
  const std::size_t G = m.grid_size();
  std::vector<double> K(G * G, 0.0);
  auto ll = [&](std::size_t g) { return m.log_marginal_likelihood(g); };
  for (std::size_t i = 0; i < G; ++i) {
    enumerate(
        [&](ReplayRng& r) {
          ChainState<std::size_t> s;
          s.theta = i;
          s.log_z = ll(i);
          if (barker)
            ideal_barker_kernel(s, m, ll, q, r);
          else
            ideal_mh_kernel(s, m, ll, q, r);
          return s.theta;
        },
        [&](double p, std::size_t j) { K[i * G + j] += p; });
  }
  return K;
}

/// Exact particle Gibbs matrix on joint states (g, x).
inline std::vector<double> pgibbs_matrix(const DiscreteToySSM& m, const GridProposal& q,
                                         const CsmcConfig& cfg) {
  const std::size_t P = num_paths(m), S = m.grid_size() * P;
  std::vector<double> K(S * S, 0.0);
  for (std::size_t i = 0; i < S; ++i) {
    ParticleSystem ps;
    enumerate(
        [&](ReplayRng& r) {
          ChainState<std::size_t> s;
          s.theta = i / P;
          s.trajectory = path_of(m, i % P);
          pgibbs_kernel(s, m, q, cfg, single_source(r), ps);
          return s.theta * P + index_of(m, s.trajectory);
        },
        [&](double p, std::size_t j) { K[i * S + j] += p; });
  }
  return K;
}

/// Exact m-PGibbs matrix on joint states (g, x), with theta held in slot l.
inline std::vector<double> mpgibbs_matrix(const DiscreteToySSM& m, const GridProposalPair& pair,
                                          const MPGibbsConfig& cfg, std::size_t slot) {
  const std::size_t P = num_paths(m), S = m.grid_size() * P;
  std::vector<double> K(S * S, 0.0);
  for (std::size_t i = 0; i < S; ++i) {
    ParticleSystem ps;
    enumerate(
        [&](ReplayRng& r) {
          ChainState<std::size_t> s;
          s.theta = i / P;
          s.trajectory = path_of(m, i % P);
          s.index = slot;
          mpgibbs_kernel(s, m, pair, cfg, single_source(r), ps);
          return s.theta * P + index_of(m, s.trajectory);
        },
        [&](double p, std::size_t j) { K[i * S + j] += p; });
  }
  return K;
}

inline GridProposal toy_grid_proposal(std::size_t G) {
  std::vector<std::vector<double>> rows(G, std::vector<double>(G));
  for (std::size_t i = 0; i < G; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < G; ++j) s += rows[i][j] = 1.0 + static_cast<double>((i + 2 * j) % 3);
    for (double& v : rows[i]) v /= s;
  }
  return GridProposal(rows);
}

inline GridProposalPair toy_pair() {
  return GridProposalPair(GridProposal({{0.7, 0.3}, {0.2, 0.8}}),
                          GridProposal({{0.6, 0.4}, {0.35, 0.65}}));
}

/// ||pi K - pi||_TV.
inline double invariance_error(std::span<const double> pi, std::span<const double> K) {
  const auto moved = push_forward(pi, K);
  return total_variation(moved, pi);
}

}  // namespace pmcmc::testing
