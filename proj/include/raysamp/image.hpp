#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "raysamp/vec.hpp"

namespace raysamp {

/// Three-channel image, row-major, interleaved RGB, values in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, Vec3 fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  Vec3 at(int u, int v) const;
  void set(int u, int v, const Vec3& rgb);

  /// Value of one channel; replicate padding for out-of-range coordinates.
  double channel_clamped(int u, int v, int c) const;

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// True when every value is finite and inside [0, 1].
  bool valid() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Single-channel row-major map. Specialised below into distinct domain types.
class Map2D {
 public:
  Map2D() = default;
  Map2D(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  double at(int u, int v) const { return values_[index(u, v)]; }
  double& at(int u, int v) { return values_[index(u, v)]; }
  /// Replicate padding for out-of-range coordinates.
  double clamped(int u, int v) const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const Map2D& o) const { return width_ == o.width_ && height_ == o.height_; }

  friend bool operator==(const Map2D&, const Map2D&) = default;

 protected:
  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width_ + u; }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Per-pixel distance along the ray in meters; 0 marks a miss.
class DepthMap : public Map2D {
 public:
  using Map2D::Map2D;
};

/// Local standard deviation before normalization.
class RawStdMap : public Map2D {
 public:
  using Map2D::Map2D;
};

enum class MapSource { Pixel, Depth, Fused };

std::string_view to_string(MapSource s);

/// Sampling weights in (0, 1].
class ProbMap : public Map2D {
 public:
  using Map2D::Map2D;

  MapSource source = MapSource::Pixel;
  /// Floor threshold used during normalization (raw units). Zero for fused maps.
  double floor_threshold = 0.0;
};

}  // namespace raysamp
