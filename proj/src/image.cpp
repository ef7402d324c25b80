#include "raysamp/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace raysamp {

Image::Image(int width, int height, Vec3 fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("image dimensions must be positive");
  data_.resize(pixel_count() * 3);
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    data_[3 * i] = fill.x;
    data_[3 * i + 1] = fill.y;
    data_[3 * i + 2] = fill.z;
  }
}

Vec3 Image::at(int u, int v) const {
  const std::size_t i = 3 * (static_cast<std::size_t>(v) * width_ + u);
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void Image::set(int u, int v, const Vec3& rgb) {
  const std::size_t i = 3 * (static_cast<std::size_t>(v) * width_ + u);
  data_[i] = rgb.x;
  data_[i + 1] = rgb.y;
  data_[i + 2] = rgb.z;
}

double Image::channel_clamped(int u, int v, int c) const {
  u = std::clamp(u, 0, width_ - 1);
  v = std::clamp(v, 0, height_ - 1);
  return data_[3 * (static_cast<std::size_t>(v) * width_ + u) + c];
}

bool Image::valid() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; });
}

Map2D::Map2D(int width, int height, double fill)
    : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, fill) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("map dimensions must be positive");
}

double Map2D::clamped(int u, int v) const {
  return at(std::clamp(u, 0, width_ - 1), std::clamp(v, 0, height_ - 1));
}

std::string_view to_string(MapSource s) {
  switch (s) {
    case MapSource::Pixel:
      return "pixel";
    case MapSource::Depth:
      return "depth";
    case MapSource::Fused:
      return "fused";
  }
  return "unknown";
}

}  // namespace raysamp
