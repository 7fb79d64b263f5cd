#include <gtest/gtest.h>

#include "toy_oracles.hpp"

namespace pmcmc {
namespace {

using namespace pmcmc::testing;

constexpr double kTol = 1e-10;
const std::vector<int> kObs{0, 1, 1};

TEST(ReplayRng, VisitsEveryPathOnce) {
  std::vector<double> seen(6, 0.0);
  const double w1[2] = {0.25, 0.75};
  const double w2[3] = {0.5, 0.0, 0.5};
  const double total = enumerate(
      [&](ReplayRng& r) { return 3 * r.categorical(w1) + r.categorical(w2); },
      [&](double p, std::size_t k) { seen[k] += p; });
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(seen[0], 0.125);
  EXPECT_DOUBLE_EQ(seen[1], 0.0);
  EXPECT_DOUBLE_EQ(seen[5], 0.375);
}

TEST(ReplayRng, BernoulliEdgesHaveOneBranch) {
  int paths = 0;
  enumerate([](ReplayRng& r) { return r.bernoulli(1.0); },
            [&](double p, bool b) {
              ++paths;
              EXPECT_TRUE(b);
              EXPECT_EQ(p, 1.0);
            });
  EXPECT_EQ(paths, 1);
}

TEST(ToyOracle, ForwardAlgorithmMatchesBruteForce) {
  const auto m = make_toy(3);
  for (std::size_t g = 0; g < 3; ++g)
    EXPECT_NEAR(m.log_marginal_likelihood(g), std::log(direct_evidence(m, g, kObs)), 1e-12);
}

struct CsmcCase {
  bool backward;
  std::size_t n;
};

class CsmcInvariance : public ::testing::TestWithParam<CsmcCase> {};

TEST_P(CsmcInvariance, StandardSelectionPreservesPathPosterior) {
  const auto m = make_toy(2);
  CsmcConfig cfg{GetParam().n, GetParam().backward, TerminalSelection::kStandardCategorical};
  for (std::size_t g = 0; g < 2; ++g) {
    const auto K = csmc_matrix(m, g, cfg);
    const auto pi = path_posterior(m, g, kObs);
    for (std::size_t i = 0; i < pi.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < pi.size(); ++j) row += K[i * pi.size() + j];
      ASSERT_NEAR(row, 1.0, 1e-12);
    }
    EXPECT_LT(invariance_error(pi, K), kTol) << "theta " << g;
  }
}

INSTANTIATE_TEST_SUITE_P(Toy, CsmcInvariance,
                         ::testing::Values(CsmcCase{false, 2}, CsmcCase{true, 2},
                                           CsmcCase{false, 3}, CsmcCase{true, 3}));

TEST(CsmcInvariance, ForcedMoveAsWrittenIsNotInvariant) {
  const auto m = make_toy(2);
  for (bool b : {false, true}) {
    CsmcConfig cfg{2, b, TerminalSelection::kForcedMove};
    const auto K = csmc_matrix(m, 0, cfg);
    EXPECT_GT(invariance_error(path_posterior(m, 0, kObs), K), 1e-3) << "B=" << b;
  }
}

TEST(IdealChains, DetailedBalanceOnThreePointGrid) {
  const auto m = make_toy(3);
  const auto q = toy_grid_proposal(3);
  const auto pi = parameter_posterior(m, kObs);
  for (bool barker : {false, true}) {
    const auto K = ideal_matrix(m, q, barker);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        EXPECT_NEAR(pi[i] * K[i * 3 + j], pi[j] * K[j * 3 + i], 1e-12);
    EXPECT_LT(invariance_error(pi, K), kTol);
  }
}

TEST(IdealChains, BarkerMovesLessThanMetropolis) {
  const auto m = make_toy(3);
  const auto q = toy_grid_proposal(3);
  const auto mh = ideal_matrix(m, q, false);
  const auto bk = ideal_matrix(m, q, true);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) {
        EXPECT_LE(bk[i * 3 + j], mh[i * 3 + j] + 1e-15);
      }
}

TEST(ParticleGibbs, PreservesJointPosterior) {
  const auto m = make_toy(2);
  const auto q = toy_grid_proposal(2);
  for (bool b : {false, true}) {
    const auto K = pgibbs_matrix(m, q, CsmcConfig{2, b, TerminalSelection::kStandardCategorical});
    EXPECT_LT(invariance_error(joint_posterior(m, kObs), K), kTol) << "B=" << b;
  }
}

struct MpgCase {
  MixtureVariant variant;
  bool backward;
  std::size_t slot;
};

class MarginalGibbsInvariance : public ::testing::TestWithParam<MpgCase> {};

TEST_P(MarginalGibbsInvariance, PreservesJointPosterior) {
  const auto m = make_toy(2);
  const auto c = GetParam();
  MPGibbsConfig cfg{2, c.variant, CsmcConfig{2, c.backward, TerminalSelection::kStandardCategorical}};
  const auto K = mpgibbs_matrix(m, toy_pair(), cfg, c.slot);
  EXPECT_LT(invariance_error(joint_posterior(m, kObs), K), kTol);
}

INSTANTIATE_TEST_SUITE_P(
    Toy, MarginalGibbsInvariance,
    ::testing::Values(MpgCase{MixtureVariant::kPosteriorMixture, false, 0},
                      MpgCase{MixtureVariant::kPosteriorMixture, true, 0},
                      MpgCase{MixtureVariant::kPosteriorMixture, true, 1},
                      MpgCase{MixtureVariant::kPriorMixture, false, 0},
                      MpgCase{MixtureVariant::kPriorMixture, true, 0},
                      MpgCase{MixtureVariant::kPriorMixture, true, 1}));

TEST(MarginalGibbsInvariance, ThreeParametersWithBackwardSampling) {
  const auto m = make_toy(2);
  MPGibbsConfig cfg{3, MixtureVariant::kPosteriorMixture,
                    CsmcConfig{2, true, TerminalSelection::kStandardCategorical}};
  const auto K = mpgibbs_matrix(m, toy_pair(), cfg, 2);
  EXPECT_LT(invariance_error(joint_posterior(m, kObs), K), kTol);
}

TEST(MarginalGibbsInvariance, ClosedFormIsRejectedForTheToyModel) {
  const auto m = make_toy(2);
  MPGibbsConfig cfg{2, MixtureVariant::kClosedFormPriorMixture, CsmcConfig{2, true}};
  EXPECT_THROW(mpgibbs_matrix(m, toy_pair(), cfg, 0), ConfigError);
}

}  // namespace
}  // namespace pmcmc
