#include "gcsim/geometry.hpp"

#include <numbers>
#include <string>

#include "gcsim/error.hpp"

namespace gcsim {

namespace {

constexpr double kCoincident = 1e-12;

void require_arity(DerivedKind kind, std::span<const Vec2> inputs, std::size_t n) {
  if (inputs.size() != n) {
    throw Error(ErrorCode::MalformedSpec,
                std::string(to_string(kind)) + " expects " + std::to_string(n) +
                    " inputs, got " + std::to_string(inputs.size()));
  }
}

Vec2 unit(Vec2 v, std::string_view what) {
  const double n = norm(v);
  if (!(n > kCoincident)) {
    throw Error(ErrorCode::DegenerateInput, std::string(what) + ": zero-length direction");
  }
  return v / n;
}

}  // namespace

void Viewport::validate() const {
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw Error(ErrorCode::DegenerateViewport, "viewport window has zero or negative extent");
  }
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::DegenerateViewport, "canvas size must be at least 1x1 pixels");
  }
}

Vec2 project(const Viewport& viewport, Vec2 world) {
  viewport.validate();
  const double u = (world.x - viewport.x_min) / (viewport.x_max - viewport.x_min);
  const double v = (viewport.y_max - world.y) / (viewport.y_max - viewport.y_min);
  return {viewport.width * u, viewport.height * v};
}

Vec2 unproject(const Viewport& viewport, Vec2 pixel) {
  viewport.validate();
  const double u = pixel.x / viewport.width;
  const double v = pixel.y / viewport.height;
  return {viewport.x_min + u * (viewport.x_max - viewport.x_min),
          viewport.y_max - v * (viewport.y_max - viewport.y_min)};
}

Vec2 canonical_direction(Vec2 d) {
  if (d.x < -1e-15 || (std::abs(d.x) <= 1e-15 && d.y < 0.0)) return {-d.x, -d.y};
  return d;
}

Line line_through(Vec2 a, Vec2 b) { return Line{a, unit(b - a, "line")}; }

std::string_view to_string(DerivedKind kind) {
  switch (kind) {
    case DerivedKind::Midpoint: return "midpoint";
    case DerivedKind::PerpendicularLine: return "perpendicular-line";
    case DerivedKind::ParallelLine: return "parallel-line";
    case DerivedKind::PerpendicularBisector: return "perpendicular-bisector";
    case DerivedKind::AngleBisector: return "angle-bisector";
    case DerivedKind::Tangents: return "tangent-pair";
    case DerivedKind::SectorEnd: return "sector-end";
  }
  return "unknown";
}

DerivedResult evaluate_derived(DerivedKind kind, std::span<const Vec2> in) {
  DerivedResult out;
  switch (kind) {
    case DerivedKind::Midpoint: {
      require_arity(kind, in, 2);
      // Symmetric in its arguments: (a + b) / 2 rounds identically either way.
      out.points.push_back(0.5 * (in[0] + in[1]));
      break;
    }
    case DerivedKind::PerpendicularLine:
    case DerivedKind::ParallelLine: {
      require_arity(kind, in, 3);
      const Vec2 base = unit(in[1] - in[0], to_string(kind));
      const Vec2 dir = kind == DerivedKind::ParallelLine ? base : perp(base);
      out.lines.push_back(Line{in[2], dir});
      out.points.push_back(in[2]);
      break;
    }
    case DerivedKind::PerpendicularBisector: {
      require_arity(kind, in, 2);
      const Vec2 d = unit(in[1] - in[0], to_string(kind));
      const Vec2 mid = 0.5 * (in[0] + in[1]);
      out.lines.push_back(Line{mid, perp(d)});
      out.points.push_back(mid);
      break;
    }
    case DerivedKind::AngleBisector: {
      require_arity(kind, in, 3);
      const Vec2 vertex = in[1];
      const Vec2 ua = unit(in[0] - vertex, "angle-bisector arm");
      const Vec2 ub = unit(in[2] - vertex, "angle-bisector arm");
      const Vec2 sum = ua + ub;
      // Straight angle: the bisector is the normal of the arms.
      const Vec2 dir = norm(sum) > 1e-12 ? sum / norm(sum) : perp(ua);
      out.lines.push_back(Line{vertex, dir});
      out.points.push_back(vertex);
      break;
    }
    case DerivedKind::Tangents: {
      require_arity(kind, in, 3);
      const Vec2 ext = in[0];
      const Vec2 center = in[1];
      const double r = distance(in[2], center);
      if (!(r > kCoincident)) throw Error(ErrorCode::DegenerateInput, "tangents: zero radius");
      const Vec2 oa = ext - center;
      const double d2 = dot(oa, oa);
      if (!(d2 > r * r * (1.0 + 1e-12))) {
        throw Error(ErrorCode::DegenerateInput, "tangents: external point lies inside or on the circle");
      }
      const double h = std::sqrt(d2 - r * r);
      const Vec2 foot = center + (r * r / d2) * oa;
      const Vec2 off = (r * h / d2) * perp(oa);
      const Vec2 t1 = foot + off;
      const Vec2 t2 = foot - off;
      out.points = {t1, t2};
      out.lines = {line_through(ext, t1), line_through(ext, t2)};
      break;
    }
    case DerivedKind::SectorEnd: {
      require_arity(kind, in, 3);
      const double r = distance(in[1], in[0]);
      if (!(r > kCoincident)) throw Error(ErrorCode::DegenerateInput, "sector: zero radius");
      const Vec2 dir = unit(in[2] - in[0], "sector end direction");
      out.points.push_back(in[0] + r * dir);
      break;
    }
  }
  return out;
}

Vec2 midpoint(Vec2 a, Vec2 b) {
  const Vec2 in[] = {a, b};
  return evaluate_derived(DerivedKind::Midpoint, in).points[0];
}

Line perpendicular_bisector(Vec2 a, Vec2 b) {
  const Vec2 in[] = {a, b};
  return evaluate_derived(DerivedKind::PerpendicularBisector, in).lines[0];
}

Line angle_bisector(Vec2 arm_a, Vec2 vertex, Vec2 arm_b) {
  const Vec2 in[] = {arm_a, vertex, arm_b};
  return evaluate_derived(DerivedKind::AngleBisector, in).lines[0];
}

std::pair<Vec2, Vec2> tangent_points(Vec2 external, Vec2 center, double radius) {
  const Vec2 in[] = {external, center, center + Vec2{radius, 0.0}};
  const auto r = evaluate_derived(DerivedKind::Tangents, in);
  return {r.points[0], r.points[1]};
}

double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

}  // namespace gcsim
