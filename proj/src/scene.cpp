#include "raysamp/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace raysamp {

void Camera::validate() const {
  if (!(fx > 0 && fy > 0)) throw std::invalid_argument("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("camera size must be positive");
  if (!(cx >= 0 && cx < width && cy >= 0 && cy < height))
    throw std::invalid_argument("camera principal point outside the image");
  const Mat3 rtr = pose.rotation.transposed() * pose.rotation;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (std::abs(rtr(r, c) - (r == c ? 1.0 : 0.0)) > 1e-6)
        throw std::invalid_argument("camera rotation is not orthonormal");
  if (std::abs(pose.rotation.determinant() - 1.0) > 1e-6)
    throw std::invalid_argument("camera rotation must have determinant +1");
}

bool Primitive::contains(const Vec3& p) const {
  const Vec3 d = p - center;
  if (kind == PrimitiveKind::Sphere) return dot(d, d) < radius * radius;
  return std::abs(d.x) < half_size.x && std::abs(d.y) < half_size.y &&
         std::abs(d.z) < half_size.z;
}

std::optional<double> Primitive::intersect(const Vec3& origin, const Vec3& direction) const {
  if (kind == PrimitiveKind::Sphere) {
    if (radius <= 0) return std::nullopt;
    const Vec3 oc = origin - center;
    const double b = dot(oc, direction);
    const double c = dot(oc, oc) - radius * radius;
    const double disc = b * b - c;
    if (disc < 0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double t0 = -b - sq;
    const double t1 = -b + sq;
    if (t0 > 0) return t0;
    if (t1 > 0) return t1;
    return std::nullopt;
  }
  const auto hit = intersect_aabb({center - half_size, center + half_size}, origin, direction);
  if (!hit) return std::nullopt;
  const double t = hit->first > 0 ? hit->first : hit->second;
  if (t > 0) return t;
  return std::nullopt;
}

void SceneSpec::validate() const {
  const Vec3 e = bounds.extent();
  if (!(e.x > 0 && e.y > 0 && e.z > 0)) throw std::invalid_argument("scene aabb is empty");
  auto unit = [](const Vec3& c) {
    for (int i = 0; i < 3; ++i)
      if (!(c[i] >= 0.0 && c[i] <= 1.0)) return false;
    return true;
  };
  if (!unit(background)) throw std::invalid_argument("background colour must lie in [0,1]");
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const auto& p = primitives[i];
    const std::string where = "primitive " + std::to_string(i) + ": ";
    if (!(p.density > 0)) throw std::invalid_argument(where + "density must be positive");
    if (!unit(p.color)) throw std::invalid_argument(where + "colour must lie in [0,1]");
    const Vec3 half = p.kind == PrimitiveKind::Sphere ? Vec3{p.radius, p.radius, p.radius}
                                                      : p.half_size;
    if (half.x < 0 || half.y < 0 || half.z < 0)
      throw std::invalid_argument(where + "negative size");
    if (!bounds.contains(p.center - half) || !bounds.contains(p.center + half))
      throw std::invalid_argument(where + "does not fit inside the scene aabb");
  }
}

Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 view = target - eye;
  if (norm(view) < 1e-9) throw std::invalid_argument("look_at: eye and target coincide");
  const Vec3 forward = normalized(view);
  const Vec3 side = cross(forward, up);
  if (norm(side) < 1e-9 * std::max(norm(up), 1e-300))
    throw std::invalid_argument("look_at: up is parallel to the view direction");
  const Vec3 right = normalized(side);
  const Vec3 cam_up = cross(right, forward);
  Pose pose;
  pose.rotation.set_column(0, right);
  pose.rotation.set_column(1, cam_up);
  pose.rotation.set_column(2, -forward);
  pose.translation = eye;
  return pose;
}

Camera make_camera(int width, int height, double fov_x_deg, const Pose& pose) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = width / (2.0 * std::tan(fov_x_deg * std::numbers::pi / 360.0));
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.pose = pose;
  return cam;
}

std::optional<std::pair<double, double>> intersect_aabb(const Aabb& box, const Vec3& origin,
                                                        const Vec3& direction) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double d = direction[a];
    const double o = origin[a];
    if (d == 0.0) {
      if (o < box.min[a] || o > box.max[a]) return std::nullopt;
      continue;
    }
    double ta = (box.min[a] - o) / d;
    double tb = (box.max[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return std::pair{t0, t1};
}

Ray generate_ray(const Camera& camera, int u, int v, const Aabb& bounds) {
  if (u < 0 || u >= camera.width || v < 0 || v >= camera.height)
    throw std::out_of_range("generate_ray: pixel outside the image");
  const Vec3 local{(u + 0.5 - camera.cx) / camera.fx, -(v + 0.5 - camera.cy) / camera.fy, -1.0};
  Ray ray;
  ray.origin = camera.pose.translation;
  ray.direction = normalized(camera.pose.rotation * local);
  if (const auto hit = intersect_aabb(bounds, ray.origin, ray.direction)) {
    ray.t_near = hit->first;
    ray.t_far = hit->second;
  }
  return ray;
}

GroundTruth render_ground_truth(const SceneSpec& spec, const Camera& camera) {
  spec.validate();
  camera.validate();
  GroundTruth gt{Image(camera.width, camera.height, spec.background),
                 DepthMap(camera.width, camera.height, 0.0)};
  for (int v = 0; v < camera.height; ++v) {
    for (int u = 0; u < camera.width; ++u) {
      const Ray ray = generate_ray(camera, u, v, spec.bounds);
      double best = std::numeric_limits<double>::infinity();
      const Primitive* hit = nullptr;
      for (const auto& prim : spec.primitives) {
        const auto t = prim.intersect(ray.origin, ray.direction);
        if (t && *t < best) {
          best = *t;
          hit = &prim;
        }
      }
      if (hit) {
        gt.image.set(u, v, hit->color);
        gt.depth.at(u, v) = best;
      }
    }
  }
  return gt;
}

RadianceGrid voxelize(const SceneSpec& spec, std::array<int, 3> resolution) {
  spec.validate();
  RadianceGrid grid(resolution, spec.bounds, kEmptyDensityRaw, 0.0);
  auto density = grid.density_raw();
  auto color = grid.color_raw();
  for (int k = 0; k < resolution[2]; ++k)
    for (int j = 0; j < resolution[1]; ++j)
      for (int i = 0; i < resolution[0]; ++i) {
        const Vec3 c = grid.voxel_center(i, j, k);
        const std::size_t idx = grid.voxel_index(i, j, k);
        for (const auto& prim : spec.primitives) {
          if (!prim.contains(c)) continue;
          density[idx] = softplus_inverse(prim.density);
          for (int ch = 0; ch < 3; ++ch) color[3 * idx + ch] = logit(prim.color[ch]);
        }
      }
  return grid;
}

SceneSpec default_scene() {
  SceneSpec s;
  s.bounds = {{-1, -1, -1}, {1, 1, 1}};
  s.background = {0, 0, 0};
  auto box = [](Vec3 c, Vec3 size, Vec3 rgb, double density) {
    Primitive p;
    p.kind = PrimitiveKind::Box;
    p.center = c;
    p.half_size = size * 0.5;
    p.color = rgb;
    p.density = density;
    return p;
  };
  auto sphere = [](Vec3 c, double r, Vec3 rgb, double density) {
    Primitive p;
    p.kind = PrimitiveKind::Sphere;
    p.center = c;
    p.radius = r;
    p.color = rgb;
    p.density = density;
    return p;
  };
  s.primitives = {
      box({0.0, -0.7, 0.0}, {1.6, 0.3, 1.6}, {0.25, 0.35, 0.8}, 50.0),
      sphere({-0.35, -0.15, 0.25}, 0.4, {0.9, 0.2, 0.15}, 50.0),
      box({0.4, -0.2, -0.35}, {0.5, 0.7, 0.5}, {0.2, 0.8, 0.3}, 50.0),
      sphere({0.35, 0.35, 0.45}, 0.22, {0.95, 0.85, 0.2}, 50.0),
  };
  return s;
}

std::vector<Camera> orbit_cameras(int views, int width, int height, double fov_x_deg,
                                  double radius, double elevation_deg, double az_begin_deg,
                                  double az_end_deg) {
  std::vector<Camera> cams;
  const double el = elevation_deg * std::numbers::pi / 180.0;
  for (int i = 0; i < views; ++i) {
    const double f = views == 1 ? 0.0 : static_cast<double>(i) / (views - 1);
    const double az = (az_begin_deg + f * (az_end_deg - az_begin_deg)) * std::numbers::pi / 180.0;
    const Vec3 eye{radius * std::cos(el) * std::sin(az), radius * std::sin(el),
                   radius * std::cos(el) * std::cos(az)};
    cams.push_back(make_camera(width, height, fov_x_deg, look_at(eye, {0, 0, 0}, {0, 1, 0})));
  }
  return cams;
}

CameraRig default_rig() {
  CameraRig rig;
  rig.cameras = orbit_cameras(3, 64, 64, 50.0, 3.2, 25.0, -45.0, 45.0);
  rig.cameras.push_back(orbit_cameras(1, 64, 64, 50.0, 3.2, 25.0, 20.0, 20.0).front());
  rig.train = {0, 1, 2};
  rig.eval = {3};
  return rig;
}

}  // namespace raysamp
