#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "raysamp/probmap.hpp"
#include "raysamp/rng.hpp"

namespace raysamp {
namespace {

// Two-pass windowed standard deviation with replicate padding, single channel.
double two_pass_std(const Map2D& m, int u, int v, int n) {
  const int r = n / 2;
  std::vector<double> vals;
  for (int dv = -r; dv <= r; ++dv)
    for (int du = -r; du <= r; ++du)
      vals.push_back(m.at(std::clamp(u + du, 0, m.width() - 1), std::clamp(v + dv, 0, m.height() - 1)));
  const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
  double ss = 0;
  for (double x : vals) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / vals.size());
}

Map2D channel(const Image& img, int c) {
  Map2D m(img.width(), img.height());
  for (int v = 0; v < img.height(); ++v)
    for (int u = 0; u < img.width(); ++u) m.at(u, v) = img.at(u, v)[c];
  return m;
}

Image random_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  Image img(w, h);
  for (double& x : img.data()) x = rng.uniform();
  return img;
}

TEST(Clamp, SupplementaryExamples) {
  EXPECT_EQ(clamp(4, 6, 22), 6);
  EXPECT_EQ(clamp(4, 6, 2), 4);
  EXPECT_EQ(clamp(4, 6, 5), 5);
}

TEST(Clamp, RejectsInvertedBounds) { EXPECT_THROW(clamp(6, 4, 5), std::invalid_argument); }

TEST(PixelStd, ConstantImageIsZero) {
  const auto m = pixel_std_map(Image(9, 7, {0.3, 0.6, 0.1}));
  for (double x : m.values()) EXPECT_EQ(x, 0.0);
}

TEST(PixelStd, CentreSpikeInThreeByThree) {
  Image img(3, 3);
  img.set(1, 1, {1, 1, 1});
  EXPECT_NEAR(pixel_std_map(img).at(1, 1), std::sqrt(8.0 / 81.0), 1e-15);
}

TEST(PixelStd, VerticalStepOnlyNearTheStep) {
  Image img(12, 6);
  for (int v = 0; v < 6; ++v)
    for (int u = 6; u < 12; ++u) img.set(u, v, {1, 1, 1});
  const auto m = pixel_std_map(img);
  for (int v = 0; v < 6; ++v)
    for (int u = 0; u < 12; ++u) {
      if (u == 5 || u == 6)
        EXPECT_NEAR(m.at(u, v), std::sqrt(2.0) / 3.0, 1e-12);
      else
        EXPECT_EQ(m.at(u, v), 0.0);
    }
}

TEST(PixelStd, AveragesChannels) {
  Image img(5, 5);
  for (int v = 0; v < 5; ++v)
    for (int u = 0; u < 5; ++u) img.set(u, v, {(u + v) % 2 * 1.0, 0.0, u * 0.1});
  const auto m = pixel_std_map(img);
  for (int v = 0; v < 5; ++v)
    for (int u = 0; u < 5; ++u) {
      double expect = 0;
      for (int c = 0; c < 3; ++c) expect += two_pass_std(channel(img, c), u, v, 3);
      EXPECT_NEAR(m.at(u, v), expect / 3, 1e-12);
    }
}

TEST(PixelStd, RejectsEvenOrSmallWindow) {
  EXPECT_THROW(pixel_std_map(Image(4, 4), 4), std::invalid_argument);
  EXPECT_THROW(pixel_std_map(Image(4, 4), 1), std::invalid_argument);
}

TEST(DepthStd, TwoPlanesPeakAtSeam) {
  const double d1 = 2.0, d2 = 3.5;
  DepthMap d(10, 6, d1);
  for (int v = 0; v < 6; ++v)
    for (int u = 5; u < 10; ++u) d.at(u, v) = d2;
  const auto m = depth_std_map(d);
  double peak = 0;
  for (int v = 0; v < 6; ++v)
    for (int u = 0; u < 10; ++u) {
      if (u < 4 || u > 5) EXPECT_EQ(m.at(u, v), 0.0);
      peak = std::max(peak, m.at(u, v));
    }
  EXPECT_NEAR(peak, std::abs(d1 - d2) * std::sqrt(2.0) / 3.0, 1e-12);
}

TEST(DepthStd, OutlierFootprint) {
  DepthMap d(9, 9, 1.0);
  d.at(4, 4) = 5.0;
  const auto m = depth_std_map(d);
  for (int v = 0; v < 9; ++v)
    for (int u = 0; u < 9; ++u) {
      const bool near = std::abs(u - 4) <= 1 && std::abs(v - 4) <= 1;
      if (near)
        EXPECT_GT(m.at(u, v), 0.0);
      else
        EXPECT_EQ(m.at(u, v), 0.0);
    }
}

TEST(DepthStd, MatchesTwoPassOracleForWiderWindows) {
  Rng rng(5);
  DepthMap d(13, 11);
  for (double& x : d.values()) x = 1 + 3 * rng.uniform();
  for (int n : {3, 5, 7}) {
    const auto m = depth_std_map(d, n);
    for (int v = 0; v < 11; ++v)
      for (int u = 0; u < 13; ++u) EXPECT_NEAR(m.at(u, v), two_pass_std(d, u, v, n), 1e-12);
  }
}

TEST(StdMaps, TranslationInvariantAwayFromBorders) {
  const Image img = random_image(24, 20, 17);
  const int k = 3;
  Image shifted(24, 20);
  for (int v = 0; v < 20; ++v)
    for (int u = 0; u < 24; ++u) shifted.set(u, v, img.at(std::max(u - k, 0), v));
  const auto a = pixel_std_map(img), b = pixel_std_map(shifted);
  for (int v = 0; v < 20; ++v)
    for (int u = 2; u + k < 23; ++u) EXPECT_NEAR(b.at(u + k, v), a.at(u, v), 1e-12);
}

TEST(StdMaps, OnePassAgreesWithTwoPassOnRandomWindows) {
  Rng rng(11);
  for (int trial = 0; trial < 64; ++trial) {
    DepthMap d(3, 3);
    const double offset = 10.0 * rng.uniform();
    for (double& x : d.values()) x = offset + rng.uniform();
    const double got = depth_std_map(d).at(1, 1), expect = two_pass_std(d, 1, 1, 3);
    EXPECT_LE(std::abs(got - expect), 1e-6 * expect);
  }
}

TEST(Normalize, HandExample) {
  // max 0.5 and mean 0.2 give s = 0.002.
  RawStdMap raw(5, 1);
  const double vals[5] = {0.5, 0.0005, 0.25, 0.1, 0.1495};
  std::copy(vals, vals + 5, raw.values().begin());
  const auto p = normalize_map(raw, MapSource::Pixel);
  EXPECT_NEAR(p.floor_threshold, 0.002, 1e-15);
  EXPECT_DOUBLE_EQ(p.at(0, 0), 1.0);
  EXPECT_NEAR(p.at(1, 0), 0.004, 1e-15);
  EXPECT_DOUBLE_EQ(p.at(2, 0), 0.5);
}

TEST(Normalize, FloorValuesMapToFloorOverMax) {
  RawStdMap raw(4, 4, 0.0);
  raw.at(2, 1) = 8.0;
  const auto p = normalize_map(raw, MapSource::Depth);
  const double s = 0.01 * 8.0 / 16.0;
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 4; ++u) EXPECT_DOUBLE_EQ(p.at(u, v), (u == 2 && v == 1) ? 1.0 : s / 8.0);
  EXPECT_EQ(p.source, MapSource::Depth);
}

TEST(Normalize, AllZeroIsDegenerate) {
  EXPECT_THROW(normalize_map(RawStdMap(3, 3, 0.0), MapSource::Pixel), DegenerateMapError);
  try {
    normalize_map(RawStdMap(3, 3, 0.0), MapSource::Pixel);
  } catch (const DegenerateMapError& e) {
    EXPECT_STREQ(e.what(), "degenerate map");
  }
}

TEST(Normalize, ScaleInvariance) {
  Rng rng(3);
  RawStdMap raw(16, 16);
  for (double& x : raw.values()) x = rng.uniform() * rng.uniform();
  const auto a = normalize_map(raw, MapSource::Pixel);
  for (double alpha : {0.5, 4.0, 1e-3}) {
    RawStdMap scaled = raw;
    for (double& x : scaled.values()) x *= alpha;
    const auto b = normalize_map(scaled, MapSource::Pixel);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-12);
  }
}

TEST(Beta, LinearRamp) {
  const BetaSchedule s{1000, 0.5};
  EXPECT_EQ(beta(0, s), 0.0);
  EXPECT_EQ(beta(500, s), 0.25);
  EXPECT_EQ(beta(1000, s), 0.5);
  EXPECT_EQ(beta(5000, s), 0.5);
  EXPECT_THROW(beta(1, BetaSchedule{0, 0.5}), std::invalid_argument);
}

TEST(Fuse, EndpointsAndHandCase) {
  ProbMap pc(3, 2, 1.0), pd(3, 2, 0.5);
  const auto quarter = fuse(pc, pd, 0.25), zero = fuse(pc, pd, 0.0), half = fuse(pc, pd, 0.5);
  for (double x : quarter.values()) EXPECT_DOUBLE_EQ(x, 0.625);
  EXPECT_TRUE(std::equal(zero.values().begin(), zero.values().end(), pd.values().begin()));
  for (double x : half.values()) EXPECT_DOUBLE_EQ(x, 0.75);
  EXPECT_EQ(half.source, MapSource::Fused);
}

TEST(Fuse, AffineInBeta) {
  Rng rng(8);
  ProbMap pc(8, 8), pd(8, 8);
  for (double& x : pc.values()) x = rng.uniform();
  for (double& x : pd.values()) x = rng.uniform();
  for (double b : {0.0, 0.1, 0.33, 0.5}) {
    const auto f = fuse(pc, pd, b);
    for (std::size_t i = 0; i < f.size(); ++i)
      EXPECT_NEAR(f.values()[i], pd.values()[i] + b * (pc.values()[i] - pd.values()[i]), 1e-12);
  }
}

TEST(Fuse, RejectsMismatchAndOutOfRangeBeta) {
  EXPECT_THROW(fuse(ProbMap(2, 2, 1), ProbMap(3, 2, 1), 0.2), std::invalid_argument);
  EXPECT_THROW(fuse(ProbMap(2, 2, 1), ProbMap(2, 2, 1), 0.6), std::invalid_argument);
}

}  // namespace
}  // namespace raysamp
