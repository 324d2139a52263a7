#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace gcsim {

/// Default tolerance for derived-object consistency and on-object checks,
/// in world units.
inline constexpr double kEpsGeo = 1e-6;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

/// Visible world window plus the pixel size of the canvas it maps onto.
struct Viewport {
  double x_min = -5.0;
  double x_max = 5.0;
  double y_min = -5.0;
  double y_max = 5.0;
  int width = 1280;
  int height = 720;

  /// Throws Error(DegenerateViewport) when the window or canvas is empty.
  void validate() const;

  double px_per_unit_x() const { return width / (x_max - x_min); }
  double px_per_unit_y() const { return height / (y_max - y_min); }
  /// Half the world-space diagonal; the normalizer for point-match distances.
  double half_diagonal() const { return 0.5 * std::hypot(x_max - x_min, y_max - y_min); }

  friend bool operator==(const Viewport&, const Viewport&) = default;
};

/// World -> pixel. Pixel y grows downwards.
Vec2 project(const Viewport& viewport, Vec2 world);
/// Pixel -> world; exact inverse of project().
Vec2 unproject(const Viewport& viewport, Vec2 pixel);

/// Infinite line through `origin` with unit `direction`.
struct Line {
  Vec2 origin;
  Vec2 direction;

  Vec2 at(double t) const { return origin + t * direction; }
  /// Signed parameter of the orthogonal projection of p.
  double param(Vec2 p) const { return dot(p - origin, direction); }
  double distance_to(Vec2 p) const { return std::abs(cross(direction, p - origin)); }
};

/// Same line direction up to sign, flipped so that x > 0 (or y > 0 when vertical).
Vec2 canonical_direction(Vec2 unit_dir);

/// Throws DegenerateInput when a == b.
Line line_through(Vec2 a, Vec2 b);

enum class DerivedKind {
  Midpoint,               // (a, b)
  PerpendicularLine,      // (base_a, base_b, through)
  ParallelLine,           // (base_a, base_b, through)
  PerpendicularBisector,  // (a, b)
  AngleBisector,          // (arm_a, vertex, arm_b)
  Tangents,               // (external, center, on_circle)
  SectorEnd,              // (center, start, end_direction) -> end point on arc
};

std::string_view to_string(DerivedKind kind);

struct DerivedResult {
  std::vector<Vec2> points;
  std::vector<Line> lines;
};

/// Closed-form construction. Throws DegenerateInput on coincident points,
/// an external point inside (or on) the circle, or a zero-length direction;
/// MalformedSpec on wrong arity.
DerivedResult evaluate_derived(DerivedKind kind, std::span<const Vec2> inputs);

// Convenience wrappers over evaluate_derived.
Vec2 midpoint(Vec2 a, Vec2 b);
Line perpendicular_bisector(Vec2 a, Vec2 b);
Line angle_bisector(Vec2 arm_a, Vec2 vertex, Vec2 arm_b);
/// Tangent points from `external` onto circle(center, radius), ordered
/// counter-clockwise as seen from the center (left of center->external first).
std::pair<Vec2, Vec2> tangent_points(Vec2 external, Vec2 center, double radius);

/// Smallest signed angle normalised into [0, 2*pi).
double normalize_angle(double radians);

}  // namespace gcsim
