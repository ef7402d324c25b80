#include "raysamp/probmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace raysamp {

namespace {

void check_window(int n) {
  if (n < 3 || n % 2 == 0)
    throw std::invalid_argument("window size must be odd and >= 3, got " + std::to_string(n));
}

// sqrt(E[x^2] - E[x]^2) over the n x n window centred at (u, v); `sample(x, y)` must apply
// the border rule. Values are offset by the centre sample first, which leaves the variance
// unchanged and makes constant windows exactly zero.
template <class Sample>
double window_std(int u, int v, int n, const Sample& sample) {
  const int r = n / 2;
  const double shift = sample(u, v);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int y = v - r; y <= v + r; ++y)
    for (int x = u - r; x <= u + r; ++x) {
      const double c = sample(x, y) - shift;
      sum += c;
      sum_sq += c * c;
    }
  const double inv = 1.0 / (static_cast<double>(n) * n);
  const double mean = sum * inv;
  const double var = sum_sq * inv - mean * mean;
  return std::sqrt(std::max(var, 0.0));
}

}  // namespace

double clamp(double lo, double hi, double x) {
  if (lo > hi) throw std::invalid_argument("clamp: lower bound exceeds upper bound");
  if (x < lo) return lo;
  if (x > hi) return hi;
  return x;
}

RawStdMap pixel_std_map(const Image& image, int n) {
  check_window(n);
  if (!image.valid()) throw std::invalid_argument("pixel_std_map: image values must be finite in [0,1]");
  RawStdMap out(image.width(), image.height());
  for (int v = 0; v < image.height(); ++v)
    for (int u = 0; u < image.width(); ++u) {
      double acc = 0.0;
      for (int c = 0; c < 3; ++c)
        acc += window_std(u, v, n, [&](int x, int y) { return image.channel_clamped(x, y, c); });
      out.at(u, v) = acc / 3.0;
    }
  return out;
}

RawStdMap depth_std_map(const DepthMap& depth, int n) {
  check_window(n);
  for (double d : depth.values())
    if (!std::isfinite(d) || d < 0) throw std::invalid_argument("depth_std_map: depth must be finite and >= 0");
  RawStdMap out(depth.width(), depth.height());
  for (int v = 0; v < depth.height(); ++v)
    for (int u = 0; u < depth.width(); ++u)
      out.at(u, v) = window_std(u, v, n, [&](int x, int y) { return depth.clamped(x, y); });
  return out;
}

ProbMap normalize_map(const RawStdMap& raw, MapSource source, double s_coefficient) {
  const auto values = raw.values();
  const double max = *std::max_element(values.begin(), values.end());
  if (!(max > 0.0)) throw DegenerateMapError();
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  const double s = s_coefficient * mean;

  ProbMap out(raw.width(), raw.height());
  out.source = source;
  out.floor_threshold = s;
  auto dst = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) dst[i] = clamp(s, max, values[i]) / max;
  return out;
}

double beta(std::int64_t iteration, const BetaSchedule& schedule) {
  if (schedule.total_iterations <= 0) throw std::invalid_argument("beta: total_iterations must be positive");
  if (iteration < 0) throw std::invalid_argument("beta: iteration must be >= 0");
  const double frac =
      std::min(static_cast<double>(iteration) / static_cast<double>(schedule.total_iterations), 1.0);
  return schedule.beta_max * frac;
}

ProbMap fuse(const ProbMap& pc, const ProbMap& pd, double beta) {
  if (!pc.same_shape(pd)) throw std::invalid_argument("fuse: map dimensions differ");
  if (!(beta >= 0.0 && beta <= 0.5)) throw std::invalid_argument("fuse: beta must lie in [0, 0.5]");
  ProbMap out(pc.width(), pc.height());
  out.source = MapSource::Fused;
  const auto a = pc.values();
  const auto b = pd.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = beta * a[i] + (1.0 - beta) * b[i];
  return out;
}

}  // namespace raysamp
