#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "raysamp/grid.hpp"
#include "raysamp/image.hpp"
#include "raysamp/vec.hpp"

namespace raysamp {

/// Camera-to-world rigid transform. The camera looks down its local -z axis; local +x is image
/// right and local +y is image up.
struct Pose {
  Mat3 rotation;
  Vec3 translation;
};

/// Pinhole camera. Pixel (u, v) has its centre at (u + 0.5, v + 0.5); v grows downward.
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;
  Pose pose;

  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;
  double t_near = 0.0;
  double t_far = 0.0;

  Vec3 at(double t) const { return origin + direction * t; }
  bool empty() const { return !(t_far > t_near); }
};

enum class PrimitiveKind { Sphere, Box };

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::Sphere;
  Vec3 center;
  double radius = 0.0;  // spheres
  Vec3 half_size;       // boxes
  Vec3 color{1, 1, 1};
  double density = 1.0;

  /// Strict interior test.
  bool contains(const Vec3& p) const;
  /// Nearest intersection distance t > 0 along a unit-direction ray, if any.
  std::optional<double> intersect(const Vec3& origin, const Vec3& direction) const;
};

struct SceneSpec {
  Aabb bounds;
  std::vector<Primitive> primitives;
  Vec3 background{0, 0, 0};

  void validate() const;
};

/// Cameras of a scene plus the split into training and held-out views.
struct CameraRig {
  std::vector<Camera> cameras;
  std::vector<int> train;
  std::vector<int> eval;
};

/// Returns a camera-to-world pose at `eye` looking toward `target`.
/// Throws std::invalid_argument for coincident points or `up` parallel to the view direction.
Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

/// Camera with a square-pixel focal length derived from a horizontal field of view and the
/// principal point at the image centre.
Camera make_camera(int width, int height, double fov_x_deg, const Pose& pose);

/// Slab test. Returns (t_enter, t_exit) clipped to t >= 0, or nullopt on a miss.
std::optional<std::pair<double, double>> intersect_aabb(const Aabb& box, const Vec3& origin,
                                                        const Vec3& direction);

/// Ray through the centre of pixel (u, v). Misses of `bounds` give t_near == t_far.
Ray generate_ray(const Camera& camera, int u, int v, const Aabb& bounds);

struct GroundTruth {
  Image image;
  DepthMap depth;
};

/// Nearest-hit analytic render: colour of the closest primitive (background on a miss), depth
/// as distance along the unit ray (0 on a miss).
GroundTruth render_ground_truth(const SceneSpec& spec, const Camera& camera);

/// Voxels whose centres are strictly inside a primitive take its density and colour (last
/// listed primitive wins on overlap); others are empty.
RadianceGrid voxelize(const SceneSpec& spec, std::array<int, 3> resolution);

/// Built-in demo scene: two boxes and two spheres of distinct colours in [-1, 1]^3.
SceneSpec default_scene();

/// Orbit rig around the origin: `views` cameras on a circle of `radius` at `elevation_deg`,
/// azimuths evenly spread over `[az_begin_deg, az_end_deg]`.
std::vector<Camera> orbit_cameras(int views, int width, int height, double fov_x_deg,
                                  double radius, double elevation_deg, double az_begin_deg,
                                  double az_end_deg);

/// Default rig: three training views at azimuths -45, 0 and 45 degrees plus one held-out
/// view at 20 degrees, all 64x64.
CameraRig default_rig();

struct SceneFile {
  SceneSpec spec;
  CameraRig rig;
};

SceneFile load_scene(const std::string& path);
SceneFile parse_scene_json(const std::string& text);
std::string scene_to_json(const SceneFile& scene);

}  // namespace raysamp
