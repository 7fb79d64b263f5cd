#include <gtest/gtest.h>

#include <random>

#include "pmcmc/numeric.hpp"

namespace pmcmc {
namespace {

TEST(LogSumExp, MatchesDirectSum) {
  const std::vector<double> v{-1.0, 0.5, 2.0};
  EXPECT_NEAR(log_sum_exp(v), std::log(std::exp(-1.0) + std::exp(0.5) + std::exp(2.0)), 1e-15);
}

TEST(LogSumExp, ShiftInvariance) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd(0.0, 30.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(1 + rep % 9);
    for (double& x : v) x = nd(gen);
    const double c = nd(gen) * 10.0;
    std::vector<double> shifted(v);
    for (double& x : shifted) x += c;
    EXPECT_NEAR(log_sum_exp(shifted), log_sum_exp(v) + c, 1e-12 * (1.0 + std::abs(c)));
  }
}

TEST(LogSumExp, HugeMagnitudesDoNotOverflow) {
  const std::vector<double> v{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(v), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> w{-1000.0, -1000.0};
  EXPECT_NEAR(log_sum_exp(w), -1000.0 + std::log(2.0), 1e-12);
}

TEST(LogSumExp, AllNegativeInfinity) {
  const std::vector<double> v{kNegInf, kNegInf};
  EXPECT_EQ(log_sum_exp(v), kNegInf);
  EXPECT_EQ(log_sum_exp(kNegInf, kNegInf), kNegInf);
  EXPECT_EQ(log_sum_exp(kNegInf, 1.5), 1.5);
}

TEST(LogSumExp, EmptyThrows) {
  EXPECT_THROW(log_sum_exp(std::span<const double>{}), std::invalid_argument);
}

TEST(LogSumExp, PairFormAgrees) {
  EXPECT_NEAR(log_sum_exp(0.3, -2.0), log_sum_exp(std::vector<double>{0.3, -2.0}), 1e-15);
}

TEST(NormalizeLogWeights, SumsToOneAndReturnsNormaliser) {
  const std::vector<double> lw{std::log(1.0), std::log(3.0), kNegInf};
  std::vector<double> w(3);
  const double z = normalize_log_weights(lw, w);
  EXPECT_NEAR(z, std::log(4.0), 1e-15);
  EXPECT_DOUBLE_EQ(w[0], 0.25);
  EXPECT_DOUBLE_EQ(w[1], 0.75);
  EXPECT_EQ(w[2], 0.0);
}

TEST(NormalizeLogWeights, CollapseThrows) {
  const std::vector<double> lw{kNegInf, kNegInf};
  EXPECT_THROW(normalize_log_weights(lw), WeightCollapse);
}

TEST(WeightCollapse, CarriesStep) {
  const WeightCollapse e(7);
  EXPECT_EQ(e.step(), 7u);
}

TEST(Densities, NormalPdf) {
  EXPECT_NEAR(log_normal_pdf(1.0, 0.0, 4.0), -0.5 * std::log(2 * M_PI * 4.0) - 0.125, 1e-15);
}

TEST(Densities, InverseGammaPdf) {
  // IG(2, 2) at x = 1: 2^2 / Gamma(2) * 1^-3 * exp(-2).
  EXPECT_NEAR(log_inverse_gamma_pdf(1.0, 2.0, 2.0), std::log(4.0) - 2.0, 1e-14);
  EXPECT_EQ(log_inverse_gamma_pdf(0.0, 2.0, 2.0), kNegInf);
  EXPECT_EQ(log_inverse_gamma_pdf(-1.0, 2.0, 2.0), kNegInf);
}

TEST(Densities, InverseGammaIntegratesToOne) {
  double acc = 0.0;
  const double h = 1e-3;
  for (double x = h / 2; x < 400.0; x += h) acc += std::exp(log_inverse_gamma_pdf(x, 2.0, 2.0)) * h;
  EXPECT_NEAR(acc, 1.0, 2e-3);
}

}  // namespace
}  // namespace pmcmc
