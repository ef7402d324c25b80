#include "raysamp/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace raysamp {

namespace {

constexpr int kRadius = 5;
constexpr int kTaps = 2 * kRadius + 1;

std::array<double, kTaps> gaussian_taps() {
  std::array<double, kTaps> g;
  double sum = 0.0;
  for (int i = 0; i < kTaps; ++i) {
    const double x = i - kRadius;
    g[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

void require_same_shape(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw std::invalid_argument("image dimensions differ");
}

}  // namespace

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b);
  const auto x = a.data();
  const auto y = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

double psnr(const Image& img, const Image& ref) {
  const double e = mse(img, ref);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(e);
}

double ssim(const Image& img, const Image& ref) {
  require_same_shape(img, ref);
  const int w = img.width();
  const int h = img.height();
  if (w < kTaps || h < kTaps) throw std::invalid_argument("ssim: images must be at least 11x11");
  static const auto g = gaussian_taps();
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;

  const int ow = w - 2 * kRadius;
  const int oh = h - 2 * kRadius;
  // Horizontal pass over all rows, then vertical pass at valid centres.
  enum { X, Y, XX, YY, XY, kMoments };
  std::vector<std::array<double, kMoments>> rows(static_cast<std::size_t>(h) * ow);

  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int v = 0; v < h; ++v)
      for (int u = 0; u < ow; ++u) {
        std::array<double, kMoments> m{};
        for (int k = 0; k < kTaps; ++k) {
          const double a = img.at(u + k, v)[c];
          const double b = ref.at(u + k, v)[c];
          m[X] += g[k] * a;
          m[Y] += g[k] * b;
          m[XX] += g[k] * a * a;
          m[YY] += g[k] * b * b;
          m[XY] += g[k] * a * b;
        }
        rows[static_cast<std::size_t>(v) * ow + u] = m;
      }
    double sum = 0.0;
    for (int v = 0; v < oh; ++v)
      for (int u = 0; u < ow; ++u) {
        std::array<double, kMoments> m{};
        for (int k = 0; k < kTaps; ++k) {
          const auto& r = rows[static_cast<std::size_t>(v + k) * ow + u];
          for (int q = 0; q < kMoments; ++q) m[q] += g[k] * r[q];
        }
        const double vx = m[XX] - m[X] * m[X];
        const double vy = m[YY] - m[Y] * m[Y];
        const double cov = m[XY] - m[X] * m[Y];
        sum += ((2 * m[X] * m[Y] + c1) * (2 * cov + c2)) /
               ((m[X] * m[X] + m[Y] * m[Y] + c1) * (vx + vy + c2));
      }
    total += sum / (static_cast<double>(ow) * oh);
  }
  return total / 3.0;
}

}  // namespace raysamp
