#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "raysamp/grid.hpp"
#include "raysamp/image.hpp"
#include "raysamp/rng.hpp"
#include "raysamp/scene.hpp"

namespace raysamp {

/// Sample positions along one ray.
struct RaySampleSet {
  std::vector<double> t;
  std::vector<double> delta;
  std::vector<Vec3> points;

  std::size_t size() const { return t.size(); }
};

/// K midpoints of equal subintervals of [t_near, t_far]. With `jitter`, each point is moved
/// uniformly inside its own subinterval. A zero-length ray yields an empty set.
RaySampleSet sample_points(const Ray& ray, int samples, Rng* jitter = nullptr);

/// The 8 grid values bracketing a point and their trilinear weights.
struct TrilinearStencil {
  std::array<std::size_t, 8> index{};
  std::array<double, 8> weight{};
};

/// Stencil for p, or nullopt outside the grid bounds. Interpolation nodes are voxel centres;
/// between the outermost centres and the bounds the nearest node value is replicated.
std::optional<TrilinearStencil> trilinear_stencil(const RadianceGrid& grid, const Vec3& p);

struct GridValue {
  double sigma = 0.0;
  Vec3 rgb;
};

/// Trilinear interpolation of raw parameters, then activation. Outside the bounds: sigma = 0,
/// rgb = 0.
GridValue query_grid(const RadianceGrid& grid, const Vec3& p);

struct RenderOutput {
  Vec3 color;
  std::vector<double> weights;
  std::vector<double> t;
  double depth = 0.0;
  double transmittance = 1.0;
};

/// Normalized expected depth sum(w t) / sum(w); 0 when sum(w) <= 1e-8.
double depth_expectation(std::span<const double> weights, std::span<const double> t);

/// Emission-absorption quadrature: alpha_k = 1 - exp(-sigma_k delta_k),
/// T_k = prod_{j<k} (1 - alpha_j), w_k = T_k alpha_k, C = sum w_k c_k + T_K background.
RenderOutput composite(std::span<const double> sigma, std::span<const Vec3> rgb,
                       std::span<const double> delta, std::span<const double> t,
                       const Vec3& background);

struct RenderSettings {
  int samples = 32;
  Vec3 background{0, 0, 0};
};

RenderOutput render_ray(const RadianceGrid& grid, const Ray& ray, const RenderSettings& settings,
                        Rng* jitter = nullptr);

/// Forward pass with everything the backward pass needs.
struct RayTape {
  RaySampleSet samples;
  std::vector<std::optional<TrilinearStencil>> stencils;
  std::vector<double> density_raw;
  std::vector<double> sigma;
  std::vector<Vec3> rgb;
  Vec3 background;
  RenderOutput out;
};

RayTape forward_ray(const RadianceGrid& grid, const Ray& ray, const RenderSettings& settings,
                    Rng* jitter = nullptr);

/// Accumulates dL/dparams into `grad` (same layout as grid.params()) given dL/dC for the
/// ray recorded in `tape`.
void backprop_ray(const RayTape& tape, const Vec3& dloss_dcolor, std::span<double> grad);

/// Convenience overload: recomputes the forward pass without jitter.
void backprop_ray(const RadianceGrid& grid, const Ray& ray, const RenderSettings& settings,
                  const Vec3& dloss_dcolor, std::span<double> grad);

struct RenderedView {
  Image image;
  DepthMap depth;
};

/// Renders every pixel of `camera` (no jitter). Deterministic for any thread count.
RenderedView render_image(const RadianceGrid& grid, const Camera& camera,
                          const RenderSettings& settings, int threads = 1);

}  // namespace raysamp
