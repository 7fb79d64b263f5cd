#pragma once

// Chain summaries: acceptance rate, integrated autocorrelation time with
// Geyer's initial positive sequence truncation, and effective sample size.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pmcmc {

/// One row per MCMC iteration.
struct ChainRecord {
  std::size_t iter = 0;
  double rho = 0.0;
  double sigma2_x = 0.0;
  double sigma2_y = 0.0;
  bool accepted = false;
  std::size_t l = 0;
  double logz = 0.0;  // NaN when the sampler carries no likelihood value
};

double acceptance_rate(std::span<const ChainRecord> records, std::size_t burn_in);

/// 1 + 2 * sum of autocorrelations, summed over consecutive lag pairs while
/// their sum stays positive. Requires at least 100 points and a non-constant
/// series.
double iact(std::span<const double> series);

/// Truncation lag reached by iact(); exposed for invariance checks.
std::size_t iact_truncation_lag(std::span<const double> series);

struct ParameterSummary {
  double mean = 0.0;
  double variance = 0.0;
  double iact = 1.0;  // clamped below at 1
  double ess = 0.0;   // retained / iact
};

struct ChainSummary {
  double acceptance_rate = 0.0;
  std::size_t burn_in = 0;
  std::size_t retained = 0;
  std::array<ParameterSummary, 3> params{};  // rho, sigma2_x, sigma2_y

  double ess_min() const;
};

/// Summary over records[burn_in:]. A parameter that never moves after burn-in
/// gets iact = retained and ess = 1.
ChainSummary summarize(std::span<const ChainRecord> records, std::size_t burn_in);

}  // namespace pmcmc
