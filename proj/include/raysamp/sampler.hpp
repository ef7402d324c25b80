#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "raysamp/image.hpp"
#include "raysamp/rng.hpp"

namespace raysamp {

struct PixelSample {
  int image = 0;
  int u = 0;
  int v = 0;

  friend bool operator==(const PixelSample&, const PixelSample&) = default;
};

using SampleBatch = std::vector<PixelSample>;

/// Inverse-CDF sampler over the pixels of a ProbMap: row-major prefix sums searched by
/// binary search. Immutable after construction.
class DiscreteSampler {
 public:
  /// Throws std::invalid_argument when the total weight is not positive or a weight is
  /// negative or non-finite.
  explicit DiscreteSampler(const Map2D& weights);

  int width() const { return width_; }
  int height() const { return height_; }
  double total() const { return prefix_.back(); }
  std::span<const double> prefix() const { return prefix_; }

  /// Probability of pixel (u, v).
  double probability(int u, int v) const;

  /// `count` i.i.d. draws with replacement, tagged with `image`.
  SampleBatch draw(Rng& rng, std::size_t count, int image = 0) const;

 private:
  int width_;
  int height_;
  std::vector<double> prefix_;
};

DiscreteSampler build_sampler(const Map2D& weights);

SampleBatch uniform_draw(int width, int height, Rng& rng, std::size_t count, int image = 0);

inline constexpr int kRegionGrid = 8;
inline constexpr int kRegionCount = kRegionGrid * kRegionGrid;

/// Pixel bounds [u0, u1) x [v0, v1) of region j (row-major over the 8 x 8 grid). The last
/// row and column absorb the remainder when the size is not divisible by 8.
struct RegionBounds {
  int u0, u1, v0, v1;
};
RegionBounds region_bounds(int j, int width, int height);
int region_of(int u, int v, int width, int height);

/// Per-region loss statistics over an 8 x 8 partition of one image.
struct RegionLossStats {
  std::array<double, kRegionCount> mean_loss{};
  std::array<std::size_t, kRegionCount> count{};
};

/// Mean per-pixel loss in each region; regions without samples report 0.
/// Throws std::invalid_argument on length mismatch, negative losses, out-of-range samples or
/// images smaller than 8 x 8.
RegionLossStats region_loss_stats(std::span<const PixelSample> batch, std::span<const double> losses,
                                  int width, int height);

/// f[j] = H[j] / sum(H), or 1/64 everywhere when every H is zero.
std::array<double, kRegionCount> adaptive_distribution(const RegionLossStats& stats);

/// Per-region sample counts: round(n_total * f[j]), with the rounding residual given to the
/// regions of largest f so the counts sum to n_total exactly.
std::array<std::size_t, kRegionCount> adaptive_counts(std::span<const double, kRegionCount> f,
                                                      std::size_t n_total);

/// Draws adaptive_counts(f, n_total)[j] pixels uniformly inside each region j.
SampleBatch adaptive_resample(std::span<const double, kRegionCount> f, std::size_t n_total,
                              int width, int height, Rng& rng, int image = 0);

}  // namespace raysamp
