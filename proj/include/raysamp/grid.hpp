#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "raysamp/vec.hpp"

namespace raysamp {

struct Aabb {
  Vec3 min{-1, -1, -1};
  Vec3 max{1, 1, 1};

  Vec3 extent() const { return max - min; }
  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
  friend bool operator==(const Aabb&, const Aabb&) = default;
};

/// Raw density that activates to (numerically) zero: softplus(-30) ~ 9.4e-14.
inline constexpr double kEmptyDensityRaw = -30.0;

double softplus(double x);
double sigmoid(double x);
/// Inverse of softplus for y > 0.
double softplus_inverse(double y);
/// Inverse of sigmoid; y is clamped into [1e-4, 1 - 1e-4] first.
double logit(double y);

/// Dense voxel grid of unconstrained parameters. Voxel (i, j, k) is centred at
/// bounds.min + (i + 0.5, j + 0.5, k + 0.5) * voxel_size and stored at index (k * ny + j) * nx + i.
///
/// Parameter layout in params(): [density_raw[0..N) | color_raw[0..3N) interleaved rgb].
/// Activations: sigma = softplus(density_raw), rgb = sigmoid(color_raw).
class RadianceGrid {
 public:
  RadianceGrid() = default;
  RadianceGrid(std::array<int, 3> resolution, const Aabb& bounds, double density_raw = 0.0,
               double color_raw = 0.0);

  const std::array<int, 3>& resolution() const { return res_; }
  const Aabb& bounds() const { return bounds_; }
  std::size_t voxel_count() const { return static_cast<std::size_t>(res_[0]) * res_[1] * res_[2]; }
  Vec3 voxel_size() const;

  std::size_t voxel_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * res_[1] + j) * res_[0] + i;
  }
  Vec3 voxel_center(int i, int j, int k) const;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> density_raw() { return std::span(params_).first(voxel_count()); }
  std::span<const double> density_raw() const { return std::span(params_).first(voxel_count()); }
  std::span<double> color_raw() { return std::span(params_).subspan(voxel_count()); }
  std::span<const double> color_raw() const { return std::span(params_).subspan(voxel_count()); }

  bool all_finite() const;

  friend bool operator==(const RadianceGrid&, const RadianceGrid&) = default;

 private:
  std::array<int, 3> res_{0, 0, 0};
  Aabb bounds_;
  std::vector<double> params_;
};

}  // namespace raysamp
