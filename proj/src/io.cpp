#include "raysamp/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <png.h>

namespace raysamp {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint32_t swap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0xFF00u) | ((x << 8) & 0xFF0000u) | (x << 24);
}

void put_u32le(std::ostream& out, std::uint32_t x) {
  if constexpr (std::endian::native == std::endian::big) x = swap32(x);
  out.write(reinterpret_cast<const char*>(&x), 4);
}

void put_f32le(std::ostream& out, float f) { put_u32le(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

// Fixed palette sampled from viridis at 9 evenly spaced stops.
constexpr std::array<std::array<int, 3>, 9> kPalette{{{68, 1, 84},
                                                      {71, 44, 122},
                                                      {59, 81, 139},
                                                      {44, 113, 142},
                                                      {33, 144, 141},
                                                      {39, 173, 129},
                                                      {92, 200, 99},
                                                      {170, 220, 50},
                                                      {253, 231, 37}}};

Vec3 palette(double x) {
  x = std::clamp(x, 0.0, 1.0) * (kPalette.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(x), kPalette.size() - 2);
  const double f = x - i;
  Vec3 c;
  for (int ch = 0; ch < 3; ++ch)
    c[ch] = ((1 - f) * kPalette[i][ch] + f * kPalette[i + 1][ch]) / 255.0;
  return c;
}

}  // namespace

void write_pfm(const std::string& path, const Map2D& map) {
  auto out = open_out(path);
  out << "Pf\n" << map.width() << ' ' << map.height() << "\n-1.0\n";
  for (int v = map.height() - 1; v >= 0; --v)
    for (int u = 0; u < map.width(); ++u) put_f32le(out, static_cast<float>(map.at(u, v)));
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

Map2D read_pfm(const std::string& path) {
  const auto bytes = slurp(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  if (token() != "Pf") throw FormatError("'" + path + "' is not a single-channel PFM");
  int w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    scale = std::stod(token());
  } catch (const std::exception&) {
    throw FormatError("'" + path + "': malformed PFM header");
  }
  ++pos;  // single whitespace byte ends the header
  if (w <= 0 || h <= 0 || scale == 0.0) throw FormatError("'" + path + "': malformed PFM header");
  const std::size_t need = static_cast<std::size_t>(w) * h * 4;
  if (bytes.size() < pos + need) throw FormatError("'" + path + "': truncated PFM payload");
  const bool little = scale < 0;
  Map2D map(w, h);
  const unsigned char* p = bytes.data() + pos;
  for (int v = h - 1; v >= 0; --v)
    for (int u = 0; u < w; ++u, p += 4) {
      std::uint32_t bits = get_u32le(p);
      if (!little) bits = swap32(bits);
      map.at(u, v) = std::bit_cast<float>(bits);
    }
  return map;
}

void write_png(const std::string& path, const Image& image) {
  std::vector<unsigned char> buf(image.pixel_count() * 3);
  const auto d = image.data();
  for (std::size_t i = 0; i < buf.size(); ++i)
    buf[i] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(d[i], 0.0, 1.0)));
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, buf.data(), 0, nullptr))
    throw std::runtime_error("cannot write PNG '" + path + "': " + png.message);
}

Image read_png(const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    throw FormatError("cannot read PNG '" + path + "': " + png.message);
  png.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&png);
    throw FormatError("malformed PNG '" + path + "': " + png.message);
  }
  Image img(static_cast<int>(png.width), static_cast<int>(png.height));
  auto d = img.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = buf[i] / 255.0;
  return img;
}

Image heat_map(const Map2D& map) {
  const auto vals = map.values();
  const double max = *std::max_element(vals.begin(), vals.end());
  Image img(map.width(), map.height());
  for (int v = 0; v < map.height(); ++v)
    for (int u = 0; u < map.width(); ++u) img.set(u, v, palette(max > 0 ? map.at(u, v) / max : 0.0));
  return img;
}

void write_heat_map_png(const std::string& path, const Map2D& map) { write_png(path, heat_map(map)); }

namespace {
constexpr char kMagic[8] = {'R', 'S', 'G', 'R', 'I', 'D', '0', '1'};
constexpr std::size_t kHeaderBytes = 8 + 3 * 4 + 6 * 4;
}  // namespace

void write_checkpoint(const std::string& path, const RadianceGrid& grid) {
  auto out = open_out(path);
  out.write(kMagic, sizeof kMagic);
  for (int n : grid.resolution()) put_u32le(out, static_cast<std::uint32_t>(n));
  for (int a = 0; a < 3; ++a) put_f32le(out, static_cast<float>(grid.bounds().min[a]));
  for (int a = 0; a < 3; ++a) put_f32le(out, static_cast<float>(grid.bounds().max[a]));
  for (double x : grid.params()) put_f32le(out, static_cast<float>(x));
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

RadianceGrid read_checkpoint(const std::string& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw FormatError("'" + path + "' is not a grid checkpoint (bad magic)");
  const unsigned char* p = bytes.data() + 8;
  std::array<int, 3> res;
  for (auto& n : res) {
    const std::uint32_t raw = get_u32le(p);
    p += 4;
    if (raw < 2 || raw > 4096) throw FormatError("'" + path + "': implausible grid resolution");
    n = static_cast<int>(raw);
  }
  auto f32 = [&p]() {
    const float f = std::bit_cast<float>(get_u32le(p));
    p += 4;
    return static_cast<double>(f);
  };
  Aabb box;
  for (int a = 0; a < 3; ++a) box.min[a] = f32();
  for (int a = 0; a < 3; ++a) box.max[a] = f32();
  RadianceGrid grid(res, box);
  const std::size_t need = kHeaderBytes + grid.params().size() * 4;
  if (bytes.size() != need) throw FormatError("'" + path + "': payload size does not match header");
  for (double& x : grid.params()) {
    x = f32();
    if (!std::isfinite(x)) throw FormatError("'" + path + "': non-finite parameter");
  }
  return grid;
}

}  // namespace raysamp
