#include "pmcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace pmcmc {

namespace {

struct Autocorr {
  double tau;
  std::size_t lag;
};

// Autocovariances from one zero-padded FFT; Geyer pairs are scanned after.
Autocorr geyer(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 100) throw std::invalid_argument("iact: need at least 100 points");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);

  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  std::vector<double> c(len, 0.0);
  for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, c);
  for (auto& z : spec) z = std::norm(z);
  std::vector<double> ac;
  fft.inv(ac, spec);
  auto acov = [&](std::size_t k) { return ac[k] / static_cast<double>(n); };

  const double c0 = acov(0);
  if (!(c0 > 0.0) || c0 <= 1e-300) throw std::invalid_argument("iact: constant series");
  const double scale = std::max(std::abs(mean), 1.0);
  if (std::sqrt(c0) <= 1e-14 * scale) throw std::invalid_argument("iact: constant series");

  // Gamma_m = c(2m) + c(2m+1); tau = -1 + 2 * sum_m Gamma_m / c0.
  double sum = 0.0;
  std::size_t m = 0;
  for (; 2 * m + 1 < n; ++m) {
    const double pair = acov(2 * m) + acov(2 * m + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  return {-1.0 + 2.0 * sum / c0, 2 * m};
}

}  // namespace

double acceptance_rate(std::span<const ChainRecord> records, std::size_t burn_in) {
  if (burn_in >= records.size())
    throw std::invalid_argument("acceptance_rate: empty post-burn-in window");
  std::size_t acc = 0;
  for (std::size_t i = burn_in; i < records.size(); ++i) acc += records[i].accepted ? 1 : 0;
  return static_cast<double>(acc) / static_cast<double>(records.size() - burn_in);
}

double iact(std::span<const double> series) { return geyer(series).tau; }

std::size_t iact_truncation_lag(std::span<const double> series) { return geyer(series).lag; }

double ChainSummary::ess_min() const {
  return std::min({params[0].ess, params[1].ess, params[2].ess});
}

ChainSummary summarize(std::span<const ChainRecord> records, std::size_t burn_in) {
  ChainSummary s;
  s.acceptance_rate = acceptance_rate(records, burn_in);
  s.burn_in = burn_in;
  s.retained = records.size() - burn_in;
  const double n = static_cast<double>(s.retained);
  std::vector<double> x(s.retained);
  for (int p = 0; p < 3; ++p) {
    for (std::size_t i = 0; i < s.retained; ++i) {
      const auto& r = records[burn_in + i];
      x[i] = p == 0 ? r.rho : p == 1 ? r.sigma2_x : r.sigma2_y;
    }
    auto& out = s.params[p];
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    out.mean = mean;
    out.variance = s.retained > 1 ? var / (n - 1.0) : 0.0;
    double tau = n;
    if (s.retained >= 100) {
      try {
        tau = std::max(1.0, iact(x));
      } catch (const std::invalid_argument&) {
        tau = n;
      }
    }
    out.iact = tau;
    out.ess = n / tau;
  }
  return s;
}

}  // namespace pmcmc
