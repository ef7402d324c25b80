#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "raysamp/metrics.hpp"
#include "raysamp/optim.hpp"
#include "ssim_reference.hpp"

namespace raysamp {
namespace {

TEST(Psnr, ClosedForms) {
  const Image a(16, 16, {0.5, 0.5, 0.5});
  EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(psnr(Image(16, 16, {0.6, 0.6, 0.6}), a), 20.0, 1e-12);
  EXPECT_NEAR(psnr(Image(16, 16, {0.51, 0.51, 0.51}), a), 40.0, 1e-9);
  EXPECT_THROW(psnr(a, Image(15, 16)), std::invalid_argument);
}

TEST(Ssim, IdenticalIsOne) {
  const auto [a, b] = ssim_reference_pair(2);
  EXPECT_DOUBLE_EQ(ssim(a, a), 1.0);
}

TEST(Ssim, BlackVersusWhite) {
  const double c1 = 0.01 * 0.01;
  EXPECT_NEAR(ssim(Image(16, 16, {0, 0, 0}), Image(16, 16, {1, 1, 1})), c1 / (1 + c1), 1e-15);
}

TEST(Ssim, NegationIsDissimilar) {
  const auto [a, b] = ssim_reference_pair(0);
  Image neg = a;
  for (double& x : neg.data()) x = 1 - x;
  EXPECT_LT(ssim(a, neg), 0.2);
}

TEST(Ssim, MatchesReferenceImplementation) {
  for (int k = 0; k < kSsimReferenceCount; ++k) {
    const auto [a, b] = ssim_reference_pair(k);
    EXPECT_NEAR(ssim(a, b), kSsimReference[k], 1e-6) << "pair " << k;
  }
}

TEST(Ssim, RejectsSmallImages) { EXPECT_THROW(ssim(Image(10, 20), Image(10, 20)), std::invalid_argument); }

TEST(MseLoss, HandCases) {
  const std::vector<Vec3> p{{0.6, 0.2, 0.3}}, g{{0.5, 0.2, 0.3}};
  const auto r = mse_loss(p, g);
  EXPECT_NEAR(r.loss, 0.01, 1e-15);
  EXPECT_NEAR(r.grad[0].x, 0.2, 1e-15);
  EXPECT_EQ(mse_loss(g, g).loss, 0.0);
  EXPECT_THROW(mse_loss(p, std::vector<Vec3>{}), std::invalid_argument);
}

TEST(MseLoss, PermutationInvariant) {
  const std::vector<Vec3> p{{0.1, 0.2, 0.3}, {0.9, 0.1, 0.4}, {0.3, 0.3, 0.3}};
  const std::vector<Vec3> g{{0.0, 0.2, 0.5}, {0.7, 0.1, 0.4}, {0.3, 0.8, 0.1}};
  const std::vector<Vec3> pp{p[2], p[0], p[1]}, gp{g[2], g[0], g[1]};
  EXPECT_DOUBLE_EQ(mse_loss(p, g).loss, mse_loss(pp, gp).loss);
}

TEST(PatchLoss, GroupsByImageAndRegion) {
  const std::vector<PixelSample> b{{0, 0, 0}, {0, 1, 1}, {1, 0, 0}};
  const std::vector<Vec3> p{{0.5, 0, 0}, {0.3, 0, 0}, {0, 0, 0.2}}, g{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  const auto r = patch_mean_l1_loss(b, p, g, 16, 16);
  EXPECT_EQ(r.patches, 2u);
  EXPECT_NEAR(r.loss, (0.4 + 0.2) / 2, 1e-15);
}

TEST(Adam, FirstStepIsLrTimesSign) {
  Adam adam(3);
  std::vector<double> p{1.0, -2.0, 0.5}, g{0.3, -40.0, 0.0};
  adam.step(p, g, 0.01);
  EXPECT_NEAR(p[0], 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(p[1], -2.0 + 0.01, 1e-9);
  EXPECT_EQ(p[2], 0.5);
}

TEST(Adam, ZeroGradientLeavesParamsAndDecaysMoments) {
  Adam adam(1);
  std::vector<double> p{1.0}, g{2.0};
  adam.step(p, g, 0.1);
  const double after = p[0], m = adam.first_moment()[0], v = adam.second_moment()[0];
  g[0] = 0.0;
  adam.step(p, g, 0.0);
  EXPECT_EQ(p[0], after);
  EXPECT_DOUBLE_EQ(adam.first_moment()[0], 0.9 * m);
  EXPECT_DOUBLE_EQ(adam.second_moment()[0], 0.999 * v);
}

TEST(Adam, MatchesHandRolledReference) {
  Adam adam(2);
  std::vector<double> p{0.2, -0.1};
  double m[2] = {0, 0}, v[2] = {0, 0}, q[2] = {0.2, -0.1};
  for (int t = 1; t <= 5; ++t) {
    const std::vector<double> g{0.1 * t, -0.3 / t};
    adam.step(p, g, 0.05);
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      q[i] -= 0.05 * (m[i] / (1 - std::pow(0.9, t))) / (std::sqrt(v[i] / (1 - std::pow(0.999, t))) + 1e-8);
    }
  }
  EXPECT_NEAR(p[0], q[0], 1e-15);
  EXPECT_NEAR(p[1], q[1], 1e-15);
}

TEST(Adam, NonFiniteGradientNamesIndex) {
  Adam adam(4);
  std::vector<double> p(4, 1.0), g{0, 0, std::nan(""), 0};
  try {
    adam.step(p, g, 0.1);
    FAIL() << "expected domain_error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos);
  }
  EXPECT_EQ(p, std::vector<double>(4, 1.0));
}

TEST(LearningRate, StepScheduleIsExact) {
  EXPECT_EQ(learning_rate(0, 0.05, 300), 0.05);
  EXPECT_EQ(learning_rate(299, 0.05, 300), 0.05);
  EXPECT_EQ(learning_rate(300, 0.05, 300), 0.025);
  EXPECT_EQ(learning_rate(999, 0.05, 300), 0.025);
}

}  // namespace
}  // namespace raysamp
