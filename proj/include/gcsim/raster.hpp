#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcsim/scene.hpp"

namespace gcsim {

/// 8-bit RGB image, row-major, top row first.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Raster() = default;
  Raster(int w, int h, std::uint8_t fill = 255);

  std::uint8_t* at(int x, int y) { return &rgb[3 * (static_cast<std::size_t>(y) * width + x)]; }
  const std::uint8_t* at(int x, int y) const { return &rgb[3 * (static_cast<std::size_t>(y) * width + x)]; }
  bool is_background(int x, int y) const {
    const auto* p = at(x, y);
    return p[0] == 255 && p[1] == 255 && p[2] == 255;
  }

  /// SHA-256 over the decoded pixels (dimensions prefixed).
  std::string hash() const;

  friend bool operator==(const Raster&, const Raster&) = default;
};

inline constexpr int kPointRadius = 3;
inline constexpr int kAnchorRadius = 2;
inline constexpr int kGlyphAdvance = 6;

/// Deterministic rasterization of the scene onto a viewport-sized canvas.
Raster render_raster(const Scene& scene);

/// Every object with its anchors projected to pixels.
nlohmann::json render_vector(const Scene& scene);

struct Rendering {
  Raster raster;
  nlohmann::json vector;
};

Rendering render(const Scene& scene);

/// Lossless PNG encode/decode.
std::vector<std::uint8_t> encode_png(const Raster& raster);
Raster decode_png(const std::vector<std::uint8_t>& bytes);
void write_png(const Raster& raster, const std::filesystem::path& path);
Raster read_png(const std::filesystem::path& path);

/// Mean absolute per-channel difference scaled to [0, 1]; rasters must match in size.
double raster_difference(const Raster& a, const Raster& b);

}  // namespace gcsim
