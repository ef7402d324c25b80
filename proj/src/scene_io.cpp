// Scene file format (JSON):
//
//   {
//     "aabb":       {"min": [x, y, z], "max": [x, y, z]},
//     "background": [r, g, b],
//     "primitives": [
//       {"kind": "sphere", "center": [x, y, z], "radius": r,        "color": [r, g, b], "density": s},
//       {"kind": "box",    "center": [x, y, z], "size": [sx, sy, sz], "color": [r, g, b], "density": s}
//     ],
//     "cameras": {                      // optional; the default rig is used when absent
//       "width": 64, "height": 64, "fov_deg": 50,
//       "views": [{"eye": [..], "target": [..], "up": [..]}, ...],
//       "train": [0, 1, 2], "eval": [3]
//     }
//   }
//
// "size" is the full edge length of a box. Colours are linear in [0, 1]; density in 1/m.

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "raysamp/scene.hpp"

namespace raysamp {

namespace {

using nlohmann::json;

Vec3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument(std::string(what) + ": expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

std::vector<int> indices(const json& j, std::size_t count, const char* what) {
  std::vector<int> out;
  for (const auto& e : j) {
    const int i = e.get<int>();
    if (i < 0 || static_cast<std::size_t>(i) >= count)
      throw std::invalid_argument(std::string(what) + ": view index out of range");
    out.push_back(i);
  }
  return out;
}

}  // namespace

SceneFile parse_scene_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scene file is not valid JSON: ") + e.what());
  }
  SceneFile scene;
  try {
    const auto& aabb = doc.at("aabb");
    scene.spec.bounds = {vec3(aabb.at("min"), "aabb.min"), vec3(aabb.at("max"), "aabb.max")};
    if (doc.contains("background")) scene.spec.background = vec3(doc["background"], "background");
    for (const auto& p : doc.at("primitives")) {
      Primitive prim;
      const auto kind = p.at("kind").get<std::string>();
      prim.center = vec3(p.at("center"), "center");
      prim.color = vec3(p.at("color"), "color");
      prim.density = p.at("density").get<double>();
      if (kind == "sphere") {
        prim.kind = PrimitiveKind::Sphere;
        prim.radius = p.at("radius").get<double>();
      } else if (kind == "box") {
        prim.kind = PrimitiveKind::Box;
        prim.half_size = vec3(p.at("size"), "size") * 0.5;
      } else {
        throw std::invalid_argument("unknown primitive kind '" + kind + "'");
      }
      scene.spec.primitives.push_back(prim);
    }
    if (doc.contains("cameras")) {
      const auto& c = doc["cameras"];
      const int w = c.at("width").get<int>();
      const int h = c.at("height").get<int>();
      const double fov = c.at("fov_deg").get<double>();
      for (const auto& v : c.at("views"))
        scene.rig.cameras.push_back(make_camera(
            w, h, fov, look_at(vec3(v.at("eye"), "eye"), vec3(v.at("target"), "target"),
                               v.contains("up") ? vec3(v["up"], "up") : Vec3{0, 1, 0})));
      scene.rig.train = indices(c.at("train"), scene.rig.cameras.size(), "cameras.train");
      scene.rig.eval = indices(c.at("eval"), scene.rig.cameras.size(), "cameras.eval");
    } else {
      scene.rig = default_rig();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed scene file: ") + e.what());
  }
  scene.spec.validate();
  for (const auto& cam : scene.rig.cameras) cam.validate();
  return scene;
}

SceneFile load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_json(ss.str());
}

std::string scene_to_json(const SceneFile& scene) {
  json doc;
  doc["aabb"] = {{"min", to_json(scene.spec.bounds.min)}, {"max", to_json(scene.spec.bounds.max)}};
  doc["background"] = to_json(scene.spec.background);
  doc["primitives"] = json::array();
  for (const auto& p : scene.spec.primitives) {
    json j{{"center", to_json(p.center)}, {"color", to_json(p.color)}, {"density", p.density}};
    if (p.kind == PrimitiveKind::Sphere) {
      j["kind"] = "sphere";
      j["radius"] = p.radius;
    } else {
      j["kind"] = "box";
      j["size"] = to_json(p.half_size * 2.0);
    }
    doc["primitives"].push_back(j);
  }
  if (!scene.rig.cameras.empty()) {
    const Camera& first = scene.rig.cameras.front();
    json cams{{"width", first.width},
              {"height", first.height},
              {"fov_deg", 2.0 * std::atan(first.width / (2.0 * first.fx)) * 180.0 / 3.14159265358979323846},
              {"train", scene.rig.train},
              {"eval", scene.rig.eval}};
    cams["views"] = json::array();
    for (const auto& c : scene.rig.cameras) {
      const Vec3 eye = c.pose.translation;
      cams["views"].push_back({{"eye", to_json(eye)},
                               {"target", to_json(eye - c.pose.rotation.column(2))},
                               {"up", to_json(c.pose.rotation.column(1))}});
    }
    doc["cameras"] = cams;
  }
  return doc.dump(2);
}

}  // namespace raysamp
