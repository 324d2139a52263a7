#include "gcsim/raster.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gcsim/error.hpp"
#include "gcsim/hash.hpp"

namespace gcsim {

using nlohmann::json;

namespace {

struct Color {
  std::uint8_t r, g, b;
};

class Painter {
 public:
  explicit Painter(Raster& r) : r_(r) {}

  void disc(Vec2 c, double radius, Color col) {
    const int x0 = static_cast<int>(std::floor(c.x - radius));
    const int x1 = static_cast<int>(std::ceil(c.x + radius));
    const int y0 = static_cast<int>(std::floor(c.y - radius));
    const int y1 = static_cast<int>(std::ceil(c.y + radius));
    const double r2 = radius * radius;
    for (int y = std::max(0, y0); y <= std::min(r_.height - 1, y1); ++y) {
      for (int x = std::max(0, x0); x <= std::min(r_.width - 1, x1); ++x) {
        const double dx = x + 0.5 - c.x;
        const double dy = y + 0.5 - c.y;
        if (dx * dx + dy * dy <= r2 + 0.5) set(x, y, col);
      }
    }
    // The pixel containing the centre is always painted.
    set(static_cast<int>(std::floor(c.x)), static_cast<int>(std::floor(c.y)), col);
  }

  void segment(Vec2 a, Vec2 b, double width, Color col) {
    if (!clip(a, b)) return;
    const double len = distance(a, b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
    for (int i = 0; i <= steps; ++i) disc(a + (static_cast<double>(i) / steps) * (b - a), 0.5 * width, col);
  }

  void polyline(const std::vector<Vec2>& pts, double width, Color col) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) segment(pts[i], pts[i + 1], width, col);
  }

  void rect_outline(Vec2 tl, double w, double h, Color col) {
    const Vec2 tr = tl + Vec2{w, 0}, bl = tl + Vec2{0, h}, br = tl + Vec2{w, h};
    segment(tl, tr, 1.0, col);
    segment(tr, br, 1.0, col);
    segment(br, bl, 1.0, col);
    segment(bl, tl, 1.0, col);
  }

 private:
  void set(int x, int y, Color c) {
    if (x < 0 || y < 0 || x >= r_.width || y >= r_.height) return;
    auto* p = r_.at(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  // Cohen-Sutherland-free parametric clip against the raster, with a margin.
  bool clip(Vec2& a, Vec2& b) const {
    const double m = 4.0;
    const double xmin = -m, ymin = -m, xmax = r_.width + m, ymax = r_.height + m;
    double t0 = 0.0, t1 = 1.0;
    const Vec2 d = b - a;
    const auto edge = [&](double p, double q) {
      if (std::abs(p) < 1e-12) return q >= 0.0;
      const double t = q / p;
      if (p < 0) {
        if (t > t1) return false;
        t0 = std::max(t0, t);
      } else {
        if (t < t0) return false;
        t1 = std::min(t1, t);
      }
      return true;
    };
    if (!(edge(-d.x, a.x - xmin) && edge(d.x, xmax - a.x) && edge(-d.y, a.y - ymin) && edge(d.y, ymax - a.y))) return false;
    const Vec2 a0 = a;
    a = a0 + t0 * d;
    b = a0 + t1 * d;
    return true;
  }

  Raster& r_;
};

Color color_of(const Style& s) { return Color{s.r, s.g, s.b}; }

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset;
};

void png_read_from_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + length > cur->bytes->size()) png_error(png, "truncated PNG");
  std::memcpy(data, cur->bytes->data() + cur->offset, length);
  cur->offset += length;
}

}  // namespace

Raster::Raster(int w, int h, std::uint8_t fill)
    : width(w), height(h), rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {}

std::string Raster::hash() const {
  std::vector<std::uint8_t> buf(8 + rgb.size());
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height)};
  std::memcpy(buf.data(), dims, 8);
  std::memcpy(buf.data() + 8, rgb.data(), rgb.size());
  return sha256_hex(buf);
}

Raster render_raster(const Scene& scene) {
  const Viewport& v = scene.viewport();
  Raster raster(v.width, v.height);
  Painter painter(raster);
  const auto px = [&](Vec2 w) { return project(v, w); };

  // Curves first, then points and anchor markers on top.
  for (const GeoObject& o : scene.objects()) {
    if (o.is_point() || o.variant == Variant::TextLabel || o.variant == Variant::Expression) continue;
    for (const auto& pl : outline(o, v)) {
      std::vector<Vec2> pix;
      pix.reserve(pl.size());
      for (Vec2 p : pl) pix.push_back(px(p));
      painter.polyline(pix, o.style.stroke_width, color_of(o.style));
    }
  }
  for (const GeoObject& o : scene.objects()) {
    if (o.variant == Variant::Expression) continue;
    for (Vec2 a : anchors(o)) painter.disc(px(a), kAnchorRadius, color_of(o.style));
    if (o.is_point()) {
      painter.disc(px(o.position()), kPointRadius, color_of(o.style));
    } else if (o.variant == Variant::TextLabel) {
      // Fixed metrics: one 4x7 box per glyph, baseline just above the anchor.
      const Vec2 origin = px(o.coords[0]) + Vec2{4.0, -10.0};
      for (std::size_t i = 0; i < o.text.size(); ++i) {
        if (o.text[i] == ' ') continue;
        painter.rect_outline(origin + Vec2{static_cast<double>(kGlyphAdvance * i), 0.0}, 4.0, 7.0, color_of(o.style));
      }
    }
  }
  return raster;
}

json render_vector(const Scene& scene) {
  json items = json::array();
  for (const GeoObject& o : scene.objects()) {
    json pts = json::array();
    for (Vec2 a : anchors(o)) {
      const Vec2 p = project(scene.viewport(), a);
      pts.push_back(json::array({p.x, p.y}));
    }
    json item{{"id", o.id}, {"label", o.label}, {"variant", to_string(o.variant)}, {"anchors_px", std::move(pts)}};
    if (!o.text.empty()) item["text"] = o.text;
    items.push_back(std::move(item));
  }
  return json{{"width", scene.viewport().width}, {"height", scene.viewport().height}, {"objects", std::move(items)}};
}

Rendering render(const Scene& scene) { return Rendering{render_raster(scene), render_vector(scene)}; }

std::vector<std::uint8_t> encode_png(const Raster& raster) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw Error(ErrorCode::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_write_to_vector, nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(raster.width), static_cast<png_uint_32>(raster.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 1);
  png_write_info(png, info);
  for (int y = 0; y < raster.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(raster.at(0, y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Raster decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw Error(ErrorCode::Io, "not a PNG file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw Error(ErrorCode::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  Raster raster;
  ReadCursor cursor{&bytes, 0};
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Io, "PNG decoding failed");
  }
  png_set_read_fn(png, &cursor, png_read_from_vector);
  png_read_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB || png_get_bit_depth(png, info) != 8) {
    png_error(png, "expected 8-bit RGB");
  }
  raster = Raster(w, h);
  for (int y = 0; y < h; ++y) png_read_row(png, raster.at(0, y), nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raster;
}

void write_png(const Raster& raster, const std::filesystem::path& path) {
  const auto bytes = encode_png(raster);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Raster read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

double raster_difference(const Raster& a, const Raster& b) {
  if (a.width != b.width || a.height != b.height) throw Error(ErrorCode::OutOfRange, "raster sizes differ");
  if (a.rgb.empty()) return 0.0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) total += static_cast<std::uint64_t>(std::abs(int(a.rgb[i]) - int(b.rgb[i])));
  return static_cast<double>(total) / (255.0 * static_cast<double>(a.rgb.size()));
}

}  // namespace gcsim
