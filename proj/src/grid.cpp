#include "raysamp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace raysamp {

double softplus(double x) {
  // log(1 + e^x) without overflow for large x
  return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_inverse(double y) {
  if (!(y > 0)) throw std::invalid_argument("softplus_inverse requires y > 0");
  return y > 30.0 ? y + std::log(-std::expm1(-y)) : std::log(std::expm1(y));
}

double logit(double y) {
  y = std::clamp(y, 1e-4, 1.0 - 1e-4);
  return std::log(y / (1.0 - y));
}

RadianceGrid::RadianceGrid(std::array<int, 3> resolution, const Aabb& bounds, double density_raw,
                           double color_raw)
    : res_(resolution), bounds_(bounds) {
  for (int n : res_)
    if (n < 2) throw std::invalid_argument("grid resolution must be >= 2 per axis");
  const Vec3 e = bounds.extent();
  if (!(e.x > 0 && e.y > 0 && e.z > 0)) throw std::invalid_argument("grid bounds are empty");
  params_.assign(voxel_count() * 4, color_raw);
  std::fill_n(params_.begin(), voxel_count(), density_raw);
}

Vec3 RadianceGrid::voxel_size() const {
  const Vec3 e = bounds_.extent();
  return {e.x / res_[0], e.y / res_[1], e.z / res_[2]};
}

Vec3 RadianceGrid::voxel_center(int i, int j, int k) const {
  const Vec3 s = voxel_size();
  return bounds_.min + Vec3{(i + 0.5) * s.x, (j + 0.5) * s.y, (k + 0.5) * s.z};
}

bool RadianceGrid::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace raysamp
