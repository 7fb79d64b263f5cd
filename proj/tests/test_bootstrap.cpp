#include <gtest/gtest.h>

#include <cmath>

#include "pmcmc/bootstrap.hpp"
#include "pmcmc/kalman.hpp"
#include "pmcmc/linear_gaussian.hpp"
#include "toy_oracles.hpp"

namespace pmcmc {
namespace {

using namespace pmcmc::testing;

TEST(Bootstrap, ConstantPotentialsGiveZeroLogZ) {
  ToyParameters p{{0.3, 0.7}, {0.5, 0.5, 0.1, 0.9}, {1.0, 1.0}};
  const DiscreteToySSM m(2, {0, 0, 0, 0}, {p}, {1.0});
  RngStream rng(1, 1);
  for (std::size_t n : {1, 5, 64}) EXPECT_EQ(bootstrap_filter(m, 0, n, rng).log_z_estimate, 0.0);
}

TEST(Bootstrap, ExactlyUnbiasedOnEnumeratedToy) {
  const auto m = make_toy(2);
  for (std::size_t g = 0; g < 2; ++g) {
    const double z = std::exp(m.log_marginal_likelihood(g));
    for (std::size_t n : {1, 2, 3}) {
      BootstrapFilter<DiscreteToySSM> f(m, n);
      double mean = 0.0;
      const double total = enumerate([&](ReplayRng& r) { return f.run(g, r).log_z_estimate; },
                                     [&](double p, double lz) { mean += p * std::exp(lz); });
      EXPECT_NEAR(total, 1.0, 1e-12);
      EXPECT_NEAR(mean, z, 1e-10 * z) << "N=" << n;
    }
  }
}

TEST(Bootstrap, UnbiasedAgainstKalman) {
  const ThetaVector th{0.9, 1.0, 1.0};
  RngStream data(2, StreamPurpose::kData);
  const auto y = simulate_linear_gaussian(th, 20, data).second;
  const LinearGaussianSSM m(y);
  const double exact = kalman_loglik(th, y);
  BootstrapFilter<LinearGaussianSSM> f(m, 32);
  RngStream rng(3, StreamPurpose::kSmc);
  const int reps = 10000;
  double s = 0, ss = 0;
  for (int i = 0; i < reps; ++i) {
    const double r = std::exp(f.run(th, rng).log_z_estimate - exact);
    s += r, ss += r * r;
  }
  const double mean = s / reps;
  const double se = std::sqrt((ss / reps - mean * mean) / reps);
  EXPECT_LT(std::abs(mean - 1.0), 3.0 * se);
}

TEST(Bootstrap, SingleParticleScoresItsOwnPath) {
  const ThetaVector th{0.8, 0.5, 0.7};
  const LinearGaussianSSM m({0.1, 0.5, -0.3, 1.0});
  RngStream rng(9, 1);
  const auto out = bootstrap_filter(m, th, 1, rng);
  const auto x = out.trace(0);
  const auto b = m.bind(th);
  double acc = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) acc += b.log_observation(t, x[t]);
  EXPECT_NEAR(out.log_z_estimate, acc, 1e-12);
}

TEST(Bootstrap, CollapseReportsStep) {
  ToyParameters p{{0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}, {1.0, 0.0, 1.0, 0.0}};
  const DiscreteToySSM m(2, {0, 0, 1}, {p}, {1.0});
  RngStream rng(1, 1);
  try {
    bootstrap_filter(m, 0, 4, rng);
    FAIL() << "expected a collapse";
  } catch (const WeightCollapse& e) {
    EXPECT_EQ(e.step(), 2u);
  }
}

TEST(Bootstrap, ZeroParticlesRejected) {
  const LinearGaussianSSM m({0.0});
  EXPECT_THROW(BootstrapFilter<LinearGaussianSSM>(m, 0), std::invalid_argument);
}

TEST(Bootstrap, OutputShapeAndGenealogy) {
  const LinearGaussianSSM m({0.1, 0.5, -0.3});
  RngStream rng(4, 1);
  const auto out = bootstrap_filter(m, ThetaVector{0.5, 1.0, 1.0}, 7, rng);
  EXPECT_EQ(out.states.size(), 21u);
  EXPECT_EQ(out.terminal_states().size(), 7u);
  double s = 0.0;
  for (double w : out.terminal_weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-12);
  for (std::size_t i = 7; i < out.ancestors.size(); ++i) EXPECT_LT(out.ancestors[i], 7u);
  const auto x = out.trace(3);
  EXPECT_EQ(x[2], out.states[2 * 7 + 3]);
  EXPECT_EQ(x[1], out.states[7 + out.ancestors[2 * 7 + 3]]);
}

TEST(Bootstrap, LogZVarianceShrinksWithN) {
  const ThetaVector th{0.9, 1.0, 1.0};
  RngStream data(5, StreamPurpose::kData);
  const auto y = simulate_linear_gaussian(th, 49, data).second;
  const LinearGaussianSSM m(y);
  RngStream rng(6, 1);
  std::vector<double> var;
  for (std::size_t n : {8, 32, 128}) {
    BootstrapFilter<LinearGaussianSSM> f(m, n);
    double s = 0, ss = 0;
    const int reps = 1000;
    for (int i = 0; i < reps; ++i) {
      const double l = f.run(th, rng).log_z_estimate;
      s += l, ss += l * l;
    }
    var.push_back(ss / reps - (s / reps) * (s / reps));
  }
  // Variance of log Z_hat scales roughly like 1/N; factor-4 steps leave ample room.
  EXPECT_GT(var[0], 2.0 * var[1]);
  EXPECT_GT(var[1], 2.0 * var[2]);
}

}  // namespace
}  // namespace pmcmc
