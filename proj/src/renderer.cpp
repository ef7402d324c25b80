#include "raysamp/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "raysamp/parallel.hpp"

namespace raysamp {

RaySampleSet sample_points(const Ray& ray, int samples, Rng* jitter) {
  if (samples < 2) throw std::invalid_argument("sample_points: need at least 2 samples per ray");
  RaySampleSet set;
  if (ray.empty()) return set;
  const double step = (ray.t_far - ray.t_near) / samples;
  set.t.resize(samples);
  set.delta.assign(samples, step);
  set.points.resize(samples);
  for (int k = 0; k < samples; ++k) {
    const double offset = jitter ? jitter->uniform() : 0.5;
    set.t[k] = ray.t_near + (k + offset) * step;
    set.points[k] = ray.at(set.t[k]);
  }
  return set;
}

std::optional<TrilinearStencil> trilinear_stencil(const RadianceGrid& grid, const Vec3& p) {
  const Aabb& b = grid.bounds();
  if (!b.contains(p)) return std::nullopt;
  const auto& res = grid.resolution();
  const Vec3 size = grid.voxel_size();
  std::array<int, 3> i0;
  std::array<double, 3> f;
  for (int a = 0; a < 3; ++a) {
    const double x = std::clamp((p[a] - b.min[a]) / size[a] - 0.5, 0.0, res[a] - 1.0);
    i0[a] = std::min(static_cast<int>(x), res[a] - 2);
    f[a] = x - i0[a];
  }
  TrilinearStencil s;
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    s.index[c] = grid.voxel_index(i0[0] + dx, i0[1] + dy, i0[2] + dz);
    s.weight[c] = (dx ? f[0] : 1.0 - f[0]) * (dy ? f[1] : 1.0 - f[1]) * (dz ? f[2] : 1.0 - f[2]);
  }
  return s;
}

namespace {

struct RawValue {
  double density = 0.0;
  Vec3 color;
};

RawValue interpolate(const RadianceGrid& grid, const TrilinearStencil& s) {
  const auto dens = grid.density_raw();
  const auto col = grid.color_raw();
  RawValue r;
  for (int c = 0; c < 8; ++c) {
    const double w = s.weight[c];
    const std::size_t i = s.index[c];
    r.density += w * dens[i];
    r.color += Vec3{col[3 * i], col[3 * i + 1], col[3 * i + 2]} * w;
  }
  return r;
}

Vec3 activate(const Vec3& raw) { return {sigmoid(raw.x), sigmoid(raw.y), sigmoid(raw.z)}; }

}  // namespace

GridValue query_grid(const RadianceGrid& grid, const Vec3& p) {
  const auto s = trilinear_stencil(grid, p);
  if (!s) return {};
  const RawValue raw = interpolate(grid, *s);
  return {softplus(raw.density), activate(raw.color)};
}

double depth_expectation(std::span<const double> weights, std::span<const double> t) {
  if (weights.size() != t.size()) throw std::invalid_argument("depth_expectation: length mismatch");
  double wsum = 0.0;
  double wt = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] < 0) throw std::invalid_argument("depth_expectation: negative weight");
    wsum += weights[k];
    wt += weights[k] * t[k];
  }
  return wsum > 1e-8 ? wt / wsum : 0.0;
}

RenderOutput composite(std::span<const double> sigma, std::span<const Vec3> rgb,
                       std::span<const double> delta, std::span<const double> t,
                       const Vec3& background) {
  const std::size_t n = sigma.size();
  if (rgb.size() != n || delta.size() != n || t.size() != n)
    throw std::invalid_argument("composite: length mismatch");
  RenderOutput out;
  out.weights.resize(n);
  out.t.assign(t.begin(), t.end());
  double trans = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = sigma[k] * delta[k];
    const double alpha = -std::expm1(-tau);
    const double w = trans * alpha;
    out.weights[k] = w;
    out.color += rgb[k] * w;
    trans -= w;  // T_{k+1} = T_k (1 - alpha_k)
  }
  out.transmittance = trans;
  out.color += background * trans;
  out.depth = depth_expectation(out.weights, t);
  return out;
}

RayTape forward_ray(const RadianceGrid& grid, const Ray& ray, const RenderSettings& settings,
                    Rng* jitter) {
  RayTape tape;
  tape.samples = sample_points(ray, settings.samples, jitter);
  const std::size_t n = tape.samples.size();
  tape.stencils.resize(n);
  tape.density_raw.assign(n, 0.0);
  tape.sigma.assign(n, 0.0);
  tape.rgb.assign(n, Vec3{});
  for (std::size_t k = 0; k < n; ++k) {
    tape.stencils[k] = trilinear_stencil(grid, tape.samples.points[k]);
    if (!tape.stencils[k]) continue;
    const RawValue raw = interpolate(grid, *tape.stencils[k]);
    tape.density_raw[k] = raw.density;
    tape.sigma[k] = softplus(raw.density);
    tape.rgb[k] = activate(raw.color);
  }
  tape.background = settings.background;
  tape.out = composite(tape.sigma, tape.rgb, tape.samples.delta, tape.samples.t, settings.background);
  return tape;
}

RenderOutput render_ray(const RadianceGrid& grid, const Ray& ray, const RenderSettings& settings,
                        Rng* jitter) {
  return forward_ray(grid, ray, settings, jitter).out;
}

void backprop_ray(const RayTape& tape, const Vec3& dloss_dcolor, std::span<double> grad) {
  const std::size_t n = tape.samples.size();
  if (n == 0) return;
  const std::size_t voxels = grad.size() / 4;
  const auto& w = tape.out.weights;
  // trans[k] = T_k, replayed exactly as in composite()
  std::vector<double> trans(n + 1);
  trans[0] = 1.0;
  for (std::size_t k = 0; k < n; ++k) trans[k + 1] = trans[k] - w[k];
  // suffix = sum_{j>k} w_j c_j + T_K * background
  Vec3 suffix = tape.background * tape.out.transmittance;
  for (std::size_t kk = n; kk-- > 0;) {
    // dC/dtau_k = T_{k+1} c_k - suffix_k
    const double dtau = dot(dloss_dcolor, tape.rgb[kk] * trans[kk + 1] - suffix);
    suffix += tape.rgb[kk] * w[kk];
    if (!tape.stencils[kk]) continue;
    const double d_density_raw = dtau * tape.samples.delta[kk] * sigmoid(tape.density_raw[kk]);
    const Vec3& c = tape.rgb[kk];
    const Vec3 d_color_raw{dloss_dcolor.x * w[kk] * c.x * (1 - c.x),
                           dloss_dcolor.y * w[kk] * c.y * (1 - c.y),
                           dloss_dcolor.z * w[kk] * c.z * (1 - c.z)};
    const auto& s = *tape.stencils[kk];
    for (int corner = 0; corner < 8; ++corner) {
      const double cw = s.weight[corner];
      if (cw == 0.0) continue;
      const std::size_t i = s.index[corner];
      grad[i] += cw * d_density_raw;
      double* gc = grad.data() + voxels + 3 * i;
      gc[0] += cw * d_color_raw.x;
      gc[1] += cw * d_color_raw.y;
      gc[2] += cw * d_color_raw.z;
    }
  }
}

void backprop_ray(const RadianceGrid& grid, const Ray& ray, const RenderSettings& settings,
                  const Vec3& dloss_dcolor, std::span<double> grad) {
  if (grad.size() != grid.params().size()) throw std::invalid_argument("backprop_ray: gradient size mismatch");
  backprop_ray(forward_ray(grid, ray, settings), dloss_dcolor, grad);
}

RenderedView render_image(const RadianceGrid& grid, const Camera& camera,
                          const RenderSettings& settings, int threads) {
  RenderedView view{Image(camera.width, camera.height), DepthMap(camera.width, camera.height)};
  parallel_chunks(static_cast<std::size_t>(camera.height), threads, threads,
                  [&](std::size_t v0, std::size_t v1, int) {
                    for (auto v = static_cast<int>(v0); v < static_cast<int>(v1); ++v)
                      for (int u = 0; u < camera.width; ++u) {
                        const Ray ray = generate_ray(camera, u, v, grid.bounds());
                        const RenderOutput out = render_ray(grid, ray, settings);
                        const Vec3 c{std::clamp(out.color.x, 0.0, 1.0),
                                     std::clamp(out.color.y, 0.0, 1.0),
                                     std::clamp(out.color.z, 0.0, 1.0)};
                        view.image.set(u, v, c);
                        view.depth.at(u, v) = out.depth;
                      }
                  });
  return view;
}

}  // namespace raysamp
