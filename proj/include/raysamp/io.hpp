#pragma once

#include <stdexcept>
#include <string>

#include "raysamp/grid.hpp"
#include "raysamp/image.hpp"

namespace raysamp {

/// Malformed or unreadable file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-channel little-endian PFM ("Pf", scale -1). Rows are stored bottom-to-top as the
/// format requires; values are narrowed to float32.
void write_pfm(const std::string& path, const Map2D& map);
/// Reads a single-channel PFM of either endianness into a map of doubles.
Map2D read_pfm(const std::string& path);

/// 8-bit RGB PNG; each channel is quantized as round(255 * clamp(x, 0, 1)).
void write_png(const std::string& path, const Image& image);
/// Reads any PNG libpng understands, converted to 8-bit RGB and scaled to [0, 1].
Image read_png(const std::string& path);

/// Heat-map visualisation: values scaled linearly by the map maximum and coloured with a
/// fixed viridis-like palette.
Image heat_map(const Map2D& map);
void write_heat_map_png(const std::string& path, const Map2D& map);

/// Grid checkpoint, all fields little-endian:
///   offset  0: magic "RSGRID01" (8 bytes)
///   offset  8: int32 nx, ny, nz
///   offset 20: float32 aabb min x, y, z, max x, y, z
///   offset 44: float32 density_raw[nx*ny*nz]   (x fastest, then y, then z)
///   then     : float32 color_raw[nx*ny*nz][3]  (interleaved r, g, b)
void write_checkpoint(const std::string& path, const RadianceGrid& grid);
/// Throws FormatError on a bad magic, truncated payload or non-finite values.
RadianceGrid read_checkpoint(const std::string& path);

}  // namespace raysamp
