#include "gcsim/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "gcsim/error.hpp"
#include "gcsim/hash.hpp"

namespace gcsim {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinLength = 1e-12;

constexpr std::array<std::pair<Variant, std::string_view>, 17> kVariantNames{{
    {Variant::Point, "point"},
    {Variant::Segment, "segment"},
    {Variant::Line, "line"},
    {Variant::Ray, "ray"},
    {Variant::Circle, "circle"},
    {Variant::Semicircle, "semicircle"},
    {Variant::CircularSector, "circular-sector"},
    {Variant::Polygon, "polygon"},
    {Variant::Parabola, "parabola"},
    {Variant::Hyperbola, "hyperbola"},
    {Variant::PerpendicularLine, "perpendicular-line"},
    {Variant::ParallelLine, "parallel-line"},
    {Variant::PerpendicularBisector, "perpendicular-bisector"},
    {Variant::AngleBisector, "angle-bisector"},
    {Variant::TangentPair, "tangent-pair"},
    {Variant::TextLabel, "text-label"},
    {Variant::Expression, "expression"},
}};

std::string describe(const GeoObject& o) {
  return std::string(to_string(o.variant)) + " '" + o.label + "'";
}

Vec2 point_input(const Input& in, const Scene& scene, std::string_view role) {
  if (const auto* raw = std::get_if<Vec2>(&in)) return *raw;
  const ObjectId id = std::get<ObjectId>(in);
  const GeoObject* obj = scene.find(id);
  if (obj == nullptr) {
    throw Error(ErrorCode::UnresolvedRef, std::string(role) + " references missing object " + std::to_string(id));
  }
  if (!obj->is_point()) {
    throw Error(ErrorCode::MalformedSpec, std::string(role) + " must be a point, got " + describe(*obj));
  }
  return obj->position();
}

const GeoObject& object_input(const Input& in, const Scene& scene, std::string_view role) {
  const auto* id = std::get_if<ObjectId>(&in);
  if (id == nullptr) throw Error(ErrorCode::MalformedSpec, std::string(role) + " must reference an object");
  const GeoObject* obj = scene.find(*id);
  if (obj == nullptr) {
    throw Error(ErrorCode::UnresolvedRef, std::string(role) + " references missing object " + std::to_string(*id));
  }
  return *obj;
}

void require_inputs(const GeoObject& o, std::size_t n) {
  if (o.inputs.size() != n) {
    throw Error(ErrorCode::MalformedSpec, std::string(to_string(o.variant)) + " expects " + std::to_string(n) +
                                              " inputs, got " + std::to_string(o.inputs.size()));
  }
}

void require_distinct(Vec2 a, Vec2 b, std::string_view what) {
  if (!(distance(a, b) > kMinLength)) throw Error(ErrorCode::MalformedSpec, std::string(what) + ": coincident points");
}

double segment_param(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 d = b - a;
  return std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
}

Vec2 closest_on_segment(Vec2 a, Vec2 b, Vec2 p) { return a + segment_param(a, b, p) * (b - a); }

Vec2 closest_on_line(const Line& l, Vec2 p) { return l.at(l.param(p)); }

Vec2 closest_on_ray(const Line& l, Vec2 p) { return l.at(std::max(0.0, l.param(p))); }

// Counter-clockwise arc of radius r about c starting at angle `start`.
struct Arc {
  Vec2 center;
  double radius;
  double start;
  double sweep;

  Vec2 at(double angle) const { return center + radius * Vec2{std::cos(angle), std::sin(angle)}; }
  Vec2 closest(Vec2 p) const {
    const Vec2 d = p - center;
    if (norm(d) > kMinLength) {
      const double rel = normalize_angle(std::atan2(d.y, d.x) - start);
      if (rel <= sweep) return center + (radius / norm(d)) * d;
    }
    const Vec2 a = at(start);
    const Vec2 b = at(start + sweep);
    return distance(p, a) <= distance(p, b) ? a : b;
  }
};

Arc semicircle_arc(const GeoObject& o) {
  const Vec2 c = midpoint(o.coords[0], o.coords[1]);
  const Vec2 d = o.coords[0] - c;
  return Arc{c, norm(d), std::atan2(d.y, d.x), kPi};
}

Arc sector_arc(const GeoObject& o) {
  const Vec2 c = o.coords[0];
  const Vec2 s = o.coords[1] - c;
  const Vec2 e = o.coords[2] - c;
  const double a0 = std::atan2(s.y, s.x);
  return Arc{c, norm(s), a0, normalize_angle(std::atan2(e.y, e.x) - a0)};
}

// Parametric conics.
struct ParabolaFrame {
  Vec2 vertex, axis, across;
  double focal;  // focus-to-directrix distance
  Vec2 at(double t) const { return vertex + t * across + (t * t / (2.0 * focal)) * axis; }
};

ParabolaFrame parabola_frame(const GeoObject& o) {
  const Vec2 f = o.coords[0];
  const Vec2 d = o.coords[1];
  const double p = distance(f, d);
  const Vec2 axis = (f - d) / p;
  return ParabolaFrame{midpoint(f, d), axis, perp(axis), p};
}

struct HyperbolaFrame {
  Vec2 center, u, v;
  double a, b;
  Vec2 at(int branch, double t) const { return center + (branch * a * std::cosh(t)) * u + (b * std::sinh(t)) * v; }
};

HyperbolaFrame hyperbola_frame(const GeoObject& o) {
  const Vec2 f1 = o.coords[0];
  const Vec2 f2 = o.coords[1];
  const double cf = 0.5 * distance(f1, f2);
  const double a = 0.5 * o.constant;
  return HyperbolaFrame{midpoint(f1, f2), (f2 - f1) / (2.0 * cf), perp((f2 - f1) / (2.0 * cf)), a,
                        std::sqrt(cf * cf - a * a)};
}

// Coarse sampling followed by golden-section refinement.
Vec2 closest_on_curve(const std::function<Vec2(double)>& f, double t0, double t1, Vec2 p) {
  constexpr int kSamples = 512;
  const double step = (t1 - t0) / kSamples;
  int best = 0;
  double best_d = kInf;
  for (int i = 0; i <= kSamples; ++i) {
    const double d = distance(f(t0 + i * step), p);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  double lo = t0 + std::max(0, best - 1) * step;
  double hi = t0 + std::min(kSamples, best + 1) * step;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo);
  double x2 = lo + g * (hi - lo);
  double f1 = distance(f(x1), p);
  double f2 = distance(f(x2), p);
  for (int it = 0; it < 100 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = distance(f(x1), p);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = distance(f(x2), p);
    }
  }
  return f(0.5 * (lo + hi));
}

Vec2 closest_on_parabola(const GeoObject& o, Vec2 p) {
  const ParabolaFrame fr = parabola_frame(o);
  const double span = 2.0 * distance(p, fr.vertex) + 1.0;
  return closest_on_curve([&](double t) { return fr.at(t); }, -span, span, p);
}

Vec2 closest_on_hyperbola(const GeoObject& o, Vec2 p) {
  const HyperbolaFrame fr = hyperbola_frame(o);
  const double span = std::asinh((2.0 * distance(p, fr.center) + fr.a) / fr.b) + 0.5;
  const Vec2 c1 = closest_on_curve([&](double t) { return fr.at(1, t); }, -span, span, p);
  const Vec2 c2 = closest_on_curve([&](double t) { return fr.at(-1, t); }, -span, span, p);
  return distance(p, c1) <= distance(p, c2) ? c1 : c2;
}

Vec2 closest_on_polyline(std::span<const Vec2> pts, bool closed, Vec2 p) {
  Vec2 best = pts.front();
  double best_d = kInf;
  const std::size_t n = pts.size();
  const std::size_t edges = closed ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    const Vec2 c = closest_on_segment(pts[i], pts[(i + 1) % n], p);
    const double d = distance(c, p);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// Liang-Barsky clip of origin + t*dir, t in [t_lo, t_hi], to a box.
std::vector<Vec2> clip_line(const Line& l, double t_lo, double t_hi, double x0, double x1, double y0, double y1) {
  double lo = t_lo;
  double hi = t_hi;
  const auto clip = [&](double p, double q) {
    if (std::abs(p) < 1e-15) return q >= 0.0;
    const double r = q / p;
    if (p < 0.0) {
      if (r > hi) return false;
      lo = std::max(lo, r);
    } else {
      if (r < lo) return false;
      hi = std::min(hi, r);
    }
    return true;
  };
  const Vec2 o = l.origin;
  const Vec2 d = l.direction;
  if (clip(-d.x, o.x - x0) && clip(d.x, x1 - o.x) && clip(-d.y, o.y - y0) && clip(d.y, y1 - o.y) && lo <= hi) {
    return {l.at(lo), l.at(hi)};
  }
  return {};
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }
Vec2 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

std::string_view to_string(Variant v) {
  for (const auto& [variant, name] : kVariantNames) {
    if (variant == v) return name;
  }
  return "unknown";
}

std::optional<Variant> variant_from_string(std::string_view name) {
  for (const auto& [variant, n] : kVariantNames) {
    if (n == name) return variant;
  }
  return std::nullopt;
}

bool is_linear(Variant v) {
  switch (v) {
    case Variant::Segment:
    case Variant::Line:
    case Variant::Ray:
    case Variant::PerpendicularLine:
    case Variant::ParallelLine:
    case Variant::PerpendicularBisector:
    case Variant::AngleBisector:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(PointKind k) {
  switch (k) {
    case PointKind::Free: return "free";
    case PointKind::Midpoint: return "midpoint";
    case PointKind::OnObject: return "on-object";
  }
  return "unknown";
}

std::vector<ObjectId> GeoObject::ref_ids() const {
  std::vector<ObjectId> ids;
  for (const Input& in : inputs) {
    if (const auto* id = std::get_if<ObjectId>(&in)) ids.push_back(*id);
  }
  return ids;
}

void evaluate_object(GeoObject& o, const Scene& scene) {
  o.coords.clear();
  o.lines.clear();
  o.constant = 0.0;
  const auto pt = [&](std::size_t i) { return point_input(o.inputs.at(i), scene, to_string(o.variant)); };

  switch (o.variant) {
    case Variant::Point:
      switch (o.point_kind) {
        case PointKind::Free:
          require_inputs(o, 1);
          if (!std::holds_alternative<Vec2>(o.inputs[0])) {
            throw Error(ErrorCode::MalformedSpec, "free point takes a raw coordinate");
          }
          o.coords = {std::get<Vec2>(o.inputs[0])};
          break;
        case PointKind::Midpoint:
          require_inputs(o, 2);
          o.coords = {midpoint(pt(0), pt(1))};
          break;
        case PointKind::OnObject: {
          require_inputs(o, 2);
          const GeoObject& host = object_input(o.inputs[0], scene, "on-object host");
          if (host.variant == Variant::TextLabel || host.variant == Variant::Expression) {
            throw Error(ErrorCode::MalformedSpec, "points cannot be attached to " + describe(host));
          }
          o.coords = {closest_point(host, pt(1))};
          break;
        }
      }
      break;
    case Variant::Segment:
    case Variant::Line:
    case Variant::Ray: {
      require_inputs(o, 2);
      const Vec2 a = pt(0), b = pt(1);
      require_distinct(a, b, to_string(o.variant));
      o.coords = {a, b};
      o.lines = {line_through(a, b)};
      break;
    }
    case Variant::Semicircle: {
      require_inputs(o, 2);
      const Vec2 a = pt(0), b = pt(1);
      require_distinct(a, b, "semicircle");
      o.coords = {a, b};
      break;
    }
    case Variant::PerpendicularBisector: {
      require_inputs(o, 2);
      const Vec2 a = pt(0), b = pt(1);
      require_distinct(a, b, "perpendicular-bisector");
      o.coords = {a, b};
      o.lines = {perpendicular_bisector(a, b)};
      break;
    }
    case Variant::Circle: {
      require_inputs(o, 2);
      const Vec2 c = pt(0), on = pt(1);
      require_distinct(c, on, "circle radius");
      o.coords = {c, on};
      break;
    }
    case Variant::CircularSector: {
      require_inputs(o, 3);
      const Vec2 c = pt(0), s = pt(1), e = pt(2);
      require_distinct(c, s, "sector radius");
      require_distinct(c, e, "sector end direction");
      const Vec2 in[] = {c, s, e};
      const Vec2 end = evaluate_derived(DerivedKind::SectorEnd, in).points[0];
      const double sweep = normalize_angle(std::atan2((end - c).y, (end - c).x) - std::atan2((s - c).y, (s - c).x));
      if (sweep < 1e-9) throw Error(ErrorCode::MalformedSpec, "sector has zero sweep");
      o.coords = {c, s, end};
      break;
    }
    case Variant::Polygon: {
      if (o.inputs.size() < 3) throw Error(ErrorCode::MalformedSpec, "polygon needs at least 3 vertices");
      for (std::size_t i = 0; i < o.inputs.size(); ++i) o.coords.push_back(pt(i));
      for (std::size_t i = 0; i < o.coords.size(); ++i) {
        require_distinct(o.coords[i], o.coords[(i + 1) % o.coords.size()], "polygon consecutive vertices");
      }
      break;
    }
    case Variant::Parabola: {
      require_inputs(o, 2);
      const Vec2 f = pt(0), d = pt(1);
      require_distinct(f, d, "parabola focus/directrix");
      o.coords = {f, d};
      break;
    }
    case Variant::Hyperbola: {
      require_inputs(o, 3);
      const Vec2 f1 = pt(0), f2 = pt(1), on = pt(2);
      require_distinct(f1, f2, "hyperbola foci");
      const double k = std::abs(distance(on, f1) - distance(on, f2));
      const double focal = distance(f1, f2);
      if (!(k > 1e-9) || !(k < focal * (1.0 - 1e-9))) {
        throw Error(ErrorCode::MalformedSpec, "hyperbola on-point must satisfy 0 < |d1 - d2| < |F1F2|");
      }
      o.coords = {f1, f2, on};
      o.constant = k;
      break;
    }
    case Variant::PerpendicularLine:
    case Variant::ParallelLine: {
      require_inputs(o, 2);
      const GeoObject& base = object_input(o.inputs[0], scene, "base line");
      if (!is_linear(base.variant)) throw Error(ErrorCode::MalformedSpec, "base must be linear, got " + describe(base));
      const Vec2 through = pt(1);
      const Line& bl = base.lines.front();
      const Vec2 in[] = {bl.origin, bl.origin + bl.direction, through};
      const auto kind = o.variant == Variant::ParallelLine ? DerivedKind::ParallelLine : DerivedKind::PerpendicularLine;
      o.coords = {through};
      o.lines = evaluate_derived(kind, in).lines;
      break;
    }
    case Variant::AngleBisector: {
      require_inputs(o, 3);
      const Vec2 a = pt(0), v = pt(1), b = pt(2);
      try {
        o.lines = {angle_bisector(a, v, b)};
      } catch (const Error& e) {
        throw Error(ErrorCode::MalformedSpec, e.what());
      }
      o.coords = {a, v, b};
      break;
    }
    case Variant::TangentPair: {
      require_inputs(o, 2);
      const Vec2 ext = pt(0);
      const GeoObject& circle = object_input(o.inputs[1], scene, "tangent circle");
      if (circle.variant != Variant::Circle) throw Error(ErrorCode::MalformedSpec, "tangents need a circle, got " + describe(circle));
      const Vec2 in[] = {ext, circle.coords[0], circle.coords[1]};
      DerivedResult r;
      try {
        r = evaluate_derived(DerivedKind::Tangents, in);
      } catch (const Error& e) {
        throw Error(ErrorCode::MalformedSpec, e.what());
      }
      o.coords = {ext, r.points[0], r.points[1]};
      o.lines = r.lines;
      break;
    }
    case Variant::TextLabel:
      require_inputs(o, 1);
      if (!std::holds_alternative<Vec2>(o.inputs[0])) throw Error(ErrorCode::MalformedSpec, "label position must be raw");
      if (o.text.empty()) throw Error(ErrorCode::MalformedSpec, "label text is empty");
      o.coords = {std::get<Vec2>(o.inputs[0])};
      break;
    case Variant::Expression:
      require_inputs(o, 0);
      if (o.text.empty()) throw Error(ErrorCode::MalformedSpec, "expression text is empty");
      break;
  }
}

Vec2 closest_point(const GeoObject& o, Vec2 p) {
  switch (o.variant) {
    case Variant::Point:
    case Variant::TextLabel:
      return o.coords[0];
    case Variant::Segment:
      return closest_on_segment(o.coords[0], o.coords[1], p);
    case Variant::Ray:
      return closest_on_ray(o.lines[0], p);
    case Variant::Line:
    case Variant::PerpendicularLine:
    case Variant::ParallelLine:
    case Variant::PerpendicularBisector:
    case Variant::AngleBisector:
      return closest_on_line(o.lines[0], p);
    case Variant::Circle: {
      const Vec2 c = o.coords[0];
      const double r = distance(c, o.coords[1]);
      const Vec2 d = p - c;
      return norm(d) > kMinLength ? c + (r / norm(d)) * d : c + Vec2{r, 0.0};
    }
    case Variant::Semicircle:
      return semicircle_arc(o).closest(p);
    case Variant::CircularSector: {
      const Arc arc = sector_arc(o);
      const Vec2 cands[] = {arc.closest(p), closest_on_segment(o.coords[0], o.coords[1], p),
                            closest_on_segment(o.coords[0], o.coords[2], p)};
      return *std::min_element(std::begin(cands), std::end(cands),
                               [&](Vec2 a, Vec2 b) { return distance(a, p) < distance(b, p); });
    }
    case Variant::Polygon:
      return closest_on_polyline(o.coords, true, p);
    case Variant::Parabola:
      return closest_on_parabola(o, p);
    case Variant::Hyperbola:
      return closest_on_hyperbola(o, p);
    case Variant::TangentPair: {
      const Vec2 a = closest_on_line(o.lines[0], p);
      const Vec2 b = closest_on_line(o.lines[1], p);
      return distance(a, p) <= distance(b, p) ? a : b;
    }
    case Variant::Expression:
      break;
  }
  return p;
}

double distance_to(const GeoObject& o, Vec2 p) {
  if (o.variant == Variant::TextLabel || o.variant == Variant::Expression) return kInf;
  switch (o.variant) {
    case Variant::Line:
    case Variant::PerpendicularLine:
    case Variant::ParallelLine:
    case Variant::PerpendicularBisector:
    case Variant::AngleBisector:
      return o.lines[0].distance_to(p);
    case Variant::Circle:
      return std::abs(distance(p, o.coords[0]) - distance(o.coords[1], o.coords[0]));
    default:
      return distance(closest_point(o, p), p);
  }
}

bool point_on_object(const GeoObject& o, Vec2 p, double tol) { return distance_to(o, p) <= tol; }

std::vector<Vec2> anchors(const GeoObject& o) {
  switch (o.variant) {
    case Variant::Segment:
      return {o.coords[0], o.coords[1], midpoint(o.coords[0], o.coords[1])};
    case Variant::PerpendicularLine:
    case Variant::ParallelLine:
    case Variant::AngleBisector: {
      const Vec2 origin = o.variant == Variant::AngleBisector ? o.coords[1] : o.coords[0];
      return {origin, origin + canonical_direction(o.lines[0].direction)};
    }
    case Variant::PerpendicularBisector: {
      const Line& l = o.lines[0];
      return {l.origin, l.origin + canonical_direction(l.direction)};
    }
    default:
      return o.coords;
  }
}

std::vector<std::vector<Vec2>> outline(const GeoObject& o, const Viewport& w) {
  // Slightly larger than the window so strokes reach the edges.
  const double mx = 0.02 * (w.x_max - w.x_min);
  const double my = 0.02 * (w.y_max - w.y_min);
  const double x0 = w.x_min - mx, x1 = w.x_max + mx, y0 = w.y_min - my, y1 = w.y_max + my;
  const double diag = std::hypot(x1 - x0, y1 - y0);
  const double inf = kInf;
  std::vector<std::vector<Vec2>> out;
  const auto sample = [&](auto&& f, double t0, double t1, int n) {
    std::vector<Vec2> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) pts.push_back(f(t0 + (t1 - t0) * i / n));
    return pts;
  };
  switch (o.variant) {
    case Variant::Point:
    case Variant::TextLabel:
      out.push_back({o.coords[0]});
      break;
    case Variant::Segment:
      out.push_back({o.coords[0], o.coords[1]});
      break;
    case Variant::Ray:
      out.push_back(clip_line(o.lines[0], 0.0, inf, x0, x1, y0, y1));
      break;
    case Variant::Line:
    case Variant::PerpendicularLine:
    case Variant::ParallelLine:
    case Variant::PerpendicularBisector:
    case Variant::AngleBisector:
      out.push_back(clip_line(o.lines[0], -inf, inf, x0, x1, y0, y1));
      break;
    case Variant::TangentPair:
      for (const Line& l : o.lines) out.push_back(clip_line(l, -inf, inf, x0, x1, y0, y1));
      break;
    case Variant::Circle: {
      const Arc arc{o.coords[0], distance(o.coords[0], o.coords[1]), 0.0, 2.0 * kPi};
      out.push_back(sample([&](double a) { return arc.at(a); }, 0.0, 2.0 * kPi, 256));
      break;
    }
    case Variant::Semicircle: {
      const Arc arc = semicircle_arc(o);
      out.push_back(sample([&](double a) { return arc.at(a); }, arc.start, arc.start + arc.sweep, 128));
      break;
    }
    case Variant::CircularSector: {
      const Arc arc = sector_arc(o);
      auto pts = sample([&](double a) { return arc.at(a); }, arc.start, arc.start + arc.sweep, 128);
      pts.insert(pts.begin(), o.coords[0]);
      pts.push_back(o.coords[0]);
      out.push_back(std::move(pts));
      break;
    }
    case Variant::Polygon: {
      auto pts = o.coords;
      pts.push_back(o.coords.front());
      out.push_back(std::move(pts));
      break;
    }
    case Variant::Parabola: {
      const ParabolaFrame fr = parabola_frame(o);
      const double span = diag + distance(fr.vertex, Vec2{0.5 * (x0 + x1), 0.5 * (y0 + y1)});
      // Parameter step chosen so adjacent samples stay close on screen.
      out.push_back(sample([&](double t) { return fr.at(t); }, -span, span, 800));
      break;
    }
    case Variant::Hyperbola: {
      const HyperbolaFrame fr = hyperbola_frame(o);
      const double span = std::asinh((diag + distance(fr.center, Vec2{0.5 * (x0 + x1), 0.5 * (y0 + y1)})) / fr.b) + 0.5;
      for (int branch : {1, -1}) {
        out.push_back(sample([&](double t) { return fr.at(branch, t); }, -span, span, 800));
      }
      break;
    }
    case Variant::Expression:
      break;
  }
  std::erase_if(out, [](const auto& pl) { return pl.empty(); });
  return out;
}

// ---------------------------------------------------------------------------

Scene::Scene(Viewport viewport) : viewport_(viewport) { viewport_.validate(); }

const GeoObject* Scene::find(ObjectId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= objects_.size()) return nullptr;
  return &objects_[static_cast<std::size_t>(id)];
}

const GeoObject& Scene::at(ObjectId id) const {
  const GeoObject* o = find(id);
  if (o == nullptr) throw Error(ErrorCode::UnresolvedRef, "no object with id " + std::to_string(id));
  return *o;
}

std::optional<ObjectId> Scene::find_label(std::string_view label) const {
  const auto it = labels_.find(label);
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

std::string Scene::next_label(Variant v) {
  for (;;) {
    std::string label;
    if (v == Variant::Point) {
      const int k = point_labels_++;
      label = std::string(1, static_cast<char>('A' + k % 26));
      if (k >= 26) label += "_" + std::to_string(k / 26);
    } else if (v == Variant::TextLabel) {
      label = "text" + std::to_string(++other_labels_);
    } else if (v == Variant::Expression) {
      label = "expr" + std::to_string(++other_labels_);
    } else {
      const int k = other_labels_++;
      label = std::string(1, static_cast<char>('a' + k % 26));
      if (k >= 26) label += "_" + std::to_string(k / 26);
    }
    if (!labels_.contains(label)) return label;
  }
}

ObjectId Scene::add_object(const ObjectSpec& spec) {
  GeoObject obj;
  obj.id = static_cast<ObjectId>(objects_.size());
  obj.variant = spec.variant;
  obj.point_kind = spec.point_kind;
  obj.inputs = spec.inputs;
  obj.text = spec.text;
  if (spec.style) {
    obj.style = *spec.style;
  } else if (spec.variant == Variant::Point) {
    obj.style = Style{20, 60, 200, 2};
  } else {
    obj.style = Style{40, 40, 40, 2};
  }
  for (const Input& in : obj.inputs) {
    if (const auto* id = std::get_if<ObjectId>(&in); id != nullptr && find(*id) == nullptr) {
      throw Error(ErrorCode::UnresolvedRef, std::string(to_string(spec.variant)) + " references missing object " +
                                                std::to_string(*id));
    }
  }
  evaluate_object(obj, *this);
  if (!spec.label.empty() && labels_.contains(spec.label)) {
    throw Error(ErrorCode::MalformedSpec, "label '" + spec.label + "' already in use");
  }
  const int saved_points = point_labels_;
  const int saved_other = other_labels_;
  obj.label = spec.label.empty() ? next_label(spec.variant) : spec.label;
  try {
    labels_.emplace(obj.label, obj.id);
    objects_.push_back(std::move(obj));
  } catch (...) {
    point_labels_ = saved_points;
    other_labels_ = saved_other;
    throw;
  }
  return objects_.back().id;
}

std::string Scene::verify(double tol) const {
  for (const GeoObject& stored : objects_) {
    for (ObjectId ref : stored.ref_ids()) {
      if (ref >= stored.id) return describe(stored) + " references a later object";
    }
    GeoObject fresh = stored;
    try {
      evaluate_object(fresh, *this);
    } catch (const Error& e) {
      return describe(stored) + ": " + e.what();
    }
    if (fresh.coords.size() != stored.coords.size() || fresh.lines.size() != stored.lines.size()) {
      return describe(stored) + ": shape changed on re-evaluation";
    }
    for (std::size_t i = 0; i < fresh.coords.size(); ++i) {
      if (distance(fresh.coords[i], stored.coords[i]) > tol) return describe(stored) + ": coordinates drifted";
    }
    for (std::size_t i = 0; i < fresh.lines.size(); ++i) {
      if (fresh.lines[i].distance_to(stored.lines[i].origin) > tol ||
          std::abs(cross(fresh.lines[i].direction, stored.lines[i].direction)) > tol) {
        return describe(stored) + ": carrier line drifted";
      }
    }
    if (std::abs(fresh.constant - stored.constant) > tol) return describe(stored) + ": constant drifted";
  }
  return {};
}

json to_json(const Viewport& v) {
  return json{{"x_min", v.x_min}, {"x_max", v.x_max}, {"y_min", v.y_min},
              {"y_max", v.y_max}, {"width", v.width}, {"height", v.height}};
}

Viewport viewport_from_json(const json& j) {
  Viewport v;
  v.x_min = j.value("x_min", v.x_min);
  v.x_max = j.value("x_max", v.x_max);
  v.y_min = j.value("y_min", v.y_min);
  v.y_max = j.value("y_max", v.y_max);
  v.width = j.value("width", v.width);
  v.height = j.value("height", v.height);
  v.validate();
  return v;
}

json Scene::to_json() const {
  json objs = json::array();
  for (const GeoObject& o : objects_) {
    json inputs = json::array();
    for (const Input& in : o.inputs) {
      if (const auto* id = std::get_if<ObjectId>(&in)) {
        inputs.push_back(json{{"ref", *id}});
      } else {
        inputs.push_back(json{{"at", vec_json(std::get<Vec2>(in))}});
      }
    }
    json coords = json::array();
    for (Vec2 c : o.coords) coords.push_back(vec_json(c));
    json lines = json::array();
    for (const Line& l : o.lines) lines.push_back(json::array({l.origin.x, l.origin.y, l.direction.x, l.direction.y}));
    json jo{{"id", o.id},
            {"label", o.label},
            {"variant", to_string(o.variant)},
            {"inputs", std::move(inputs)},
            {"coords", std::move(coords)},
            {"style", json::array({o.style.r, o.style.g, o.style.b, o.style.stroke_width})}};
    if (o.is_point()) jo["point_kind"] = to_string(o.point_kind);
    if (!o.lines.empty()) jo["lines"] = std::move(lines);
    if (!o.text.empty()) jo["text"] = o.text;
    if (o.variant == Variant::Hyperbola) jo["constant"] = o.constant;
    objs.push_back(std::move(jo));
  }
  return json{{"viewport", gcsim::to_json(viewport_)}, {"objects", std::move(objs)}};
}

Scene Scene::from_json(const json& j) {
  Scene scene(j.contains("viewport") ? viewport_from_json(j.at("viewport")) : Viewport{});
  for (const json& jo : j.at("objects")) {
    ObjectSpec spec;
    const auto name = jo.at("variant").get<std::string>();
    const auto variant = variant_from_string(name);
    if (!variant) throw Error(ErrorCode::MalformedSpec, "unknown variant '" + name + "'");
    spec.variant = *variant;
    if (spec.variant == Variant::Point) {
      const auto kind = jo.value("point_kind", std::string("free"));
      if (kind == "free") {
        spec.point_kind = PointKind::Free;
      } else if (kind == "midpoint") {
        spec.point_kind = PointKind::Midpoint;
      } else if (kind == "on-object") {
        spec.point_kind = PointKind::OnObject;
      } else {
        throw Error(ErrorCode::MalformedSpec, "unknown point kind '" + kind + "'");
      }
    }
    for (const json& in : jo.at("inputs")) {
      if (in.contains("ref")) {
        spec.inputs.emplace_back(in.at("ref").get<ObjectId>());
      } else {
        spec.inputs.emplace_back(vec_from(in.at("at")));
      }
    }
    spec.text = jo.value("text", std::string());
    spec.label = jo.value("label", std::string());
    if (jo.contains("style")) {
      const json& s = jo.at("style");
      spec.style = Style{s.at(0).get<std::uint8_t>(), s.at(1).get<std::uint8_t>(), s.at(2).get<std::uint8_t>(),
                         s.at(3).get<int>()};
    }
    const ObjectId id = scene.add_object(spec);
    if (jo.contains("id") && jo.at("id").get<ObjectId>() != id) {
      throw Error(ErrorCode::MalformedSpec, "object ids must be dense and in creation order");
    }
    // Stored coordinates must agree with re-evaluation.
    if (jo.contains("coords")) {
      const GeoObject& o = scene.at(id);
      const json& coords = jo.at("coords");
      if (coords.size() != o.coords.size()) throw Error(ErrorCode::MalformedSpec, "stored coords do not match " + name);
      for (std::size_t i = 0; i < coords.size(); ++i) {
        if (distance(vec_from(coords[i]), o.coords[i]) > kEpsGeo) {
          throw Error(ErrorCode::MalformedSpec, "stored coords of '" + o.label + "' disagree with its definition");
        }
      }
    }
  }
  return scene;
}

std::string Scene::hash() const { return sha256_hex(to_json().dump()); }

}  // namespace gcsim
