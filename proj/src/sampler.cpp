#include "raysamp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace raysamp {

DiscreteSampler::DiscreteSampler(const Map2D& weights)
    : width_(weights.width()), height_(weights.height()) {
  const auto w = weights.values();
  if (w.empty()) throw std::invalid_argument("build_sampler: empty map");
  prefix_.resize(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0)
      throw std::invalid_argument("build_sampler: weights must be finite and >= 0");
    acc += w[i];
    prefix_[i] = acc;
  }
  if (!(acc > 0)) throw std::invalid_argument("build_sampler: total weight must be positive");
}

double DiscreteSampler::probability(int u, int v) const {
  const std::size_t i = static_cast<std::size_t>(v) * width_ + u;
  const double lo = i == 0 ? 0.0 : prefix_[i - 1];
  return (prefix_[i] - lo) / total();
}

SampleBatch DiscreteSampler::draw(Rng& rng, std::size_t count, int image) const {
  SampleBatch out;
  out.reserve(count);
  const double tot = total();
  for (std::size_t n = 0; n < count; ++n) {
    const double x = rng.uniform() * tot;
    auto it = std::upper_bound(prefix_.begin(), prefix_.end(), x);
    if (it == prefix_.end()) --it;  // x rounded up to the total
    // skip zero-weight cells that can only be hit through rounding
    while (it != prefix_.begin() && *it == *(it - 1)) --it;
    const auto idx = static_cast<int>(it - prefix_.begin());
    out.push_back({image, idx % width_, idx / width_});
  }
  return out;
}

DiscreteSampler build_sampler(const Map2D& weights) { return DiscreteSampler(weights); }

SampleBatch uniform_draw(int width, int height, Rng& rng, std::size_t count, int image) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("uniform_draw: empty image");
  SampleBatch out;
  out.reserve(count);
  const auto n = static_cast<std::uint64_t>(width) * height;
  for (std::size_t i = 0; i < count; ++i) {
    const auto idx = static_cast<int>(rng.below(n));
    out.push_back({image, idx % width, idx / width});
  }
  return out;
}

RegionBounds region_bounds(int j, int width, int height) {
  const int rw = width / kRegionGrid;
  const int rh = height / kRegionGrid;
  const int rx = j % kRegionGrid;
  const int ry = j / kRegionGrid;
  return {rx * rw, rx == kRegionGrid - 1 ? width : (rx + 1) * rw, ry * rh,
          ry == kRegionGrid - 1 ? height : (ry + 1) * rh};
}

int region_of(int u, int v, int width, int height) {
  const int rx = std::min(u / (width / kRegionGrid), kRegionGrid - 1);
  const int ry = std::min(v / (height / kRegionGrid), kRegionGrid - 1);
  return ry * kRegionGrid + rx;
}

RegionLossStats region_loss_stats(std::span<const PixelSample> batch, std::span<const double> losses,
                                  int width, int height) {
  if (batch.size() != losses.size())
    throw std::invalid_argument("region_loss_stats: batch and loss lengths differ");
  if (width < kRegionGrid || height < kRegionGrid)
    throw std::invalid_argument("region_loss_stats: image must be at least 8x8");
  RegionLossStats stats;
  std::array<double, kRegionCount> sum{};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& s = batch[i];
    if (s.u < 0 || s.u >= width || s.v < 0 || s.v >= height)
      throw std::invalid_argument("region_loss_stats: sample outside the image");
    if (!(losses[i] >= 0)) throw std::invalid_argument("region_loss_stats: losses must be >= 0");
    const int j = region_of(s.u, s.v, width, height);
    sum[j] += losses[i];
    ++stats.count[j];
  }
  for (int j = 0; j < kRegionCount; ++j)
    stats.mean_loss[j] = stats.count[j] ? sum[j] / static_cast<double>(stats.count[j]) : 0.0;
  return stats;
}

std::array<double, kRegionCount> adaptive_distribution(const RegionLossStats& stats) {
  std::array<double, kRegionCount> f;
  const double total = std::accumulate(stats.mean_loss.begin(), stats.mean_loss.end(), 0.0);
  if (!(total > 0)) {
    f.fill(1.0 / kRegionCount);
    return f;
  }
  for (int j = 0; j < kRegionCount; ++j) f[j] = stats.mean_loss[j] / total;
  return f;
}

std::array<std::size_t, kRegionCount> adaptive_counts(std::span<const double, kRegionCount> f,
                                                      std::size_t n_total) {
  double sum = 0.0;
  for (double x : f) {
    if (!(x >= 0)) throw std::invalid_argument("adaptive_counts: f must be nonnegative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("adaptive_counts: f must sum to 1");
  std::array<long long, kRegionCount> counts;
  long long assigned = 0;
  for (int j = 0; j < kRegionCount; ++j) {
    counts[j] = std::llround(static_cast<double>(n_total) * f[j]);
    assigned += counts[j];
  }
  // stable order of decreasing f; ties keep the lower region index first
  std::array<int, kRegionCount> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return f[a] > f[b]; });

  long long residual = static_cast<long long>(n_total) - assigned;
  if (residual > 0) {
    counts[order[0]] += residual;
  } else {
    for (int idx = 0; residual < 0 && idx < kRegionCount; ++idx) {
      const long long take = std::min(counts[order[idx]], -residual);
      counts[order[idx]] -= take;
      residual += take;
    }
  }
  std::array<std::size_t, kRegionCount> out;
  for (int j = 0; j < kRegionCount; ++j) out[j] = static_cast<std::size_t>(counts[j]);
  return out;
}

SampleBatch adaptive_resample(std::span<const double, kRegionCount> f, std::size_t n_total,
                              int width, int height, Rng& rng, int image) {
  if (width < kRegionGrid || height < kRegionGrid)
    throw std::invalid_argument("adaptive_resample: image must be at least 8x8");
  const auto counts = adaptive_counts(f, n_total);
  SampleBatch out;
  out.reserve(n_total);
  for (int j = 0; j < kRegionCount; ++j) {
    const RegionBounds b = region_bounds(j, width, height);
    const auto rw = static_cast<std::uint64_t>(b.u1 - b.u0);
    const auto rh = static_cast<std::uint64_t>(b.v1 - b.v0);
    for (std::size_t n = 0; n < counts[j]; ++n) {
      const auto idx = rng.below(rw * rh);
      out.push_back({image, b.u0 + static_cast<int>(idx % rw), b.v0 + static_cast<int>(idx / rw)});
    }
  }
  return out;
}

}  // namespace raysamp
