#include "gcsim/library.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <regex>

#include "gcsim/error.hpp"

namespace gcsim {

namespace {

// clang-format off
constexpr std::array<FunctionInfo, kFunctionCount> kTable{{
  {Function::GenerateInputAction,   "generate_input_action",   "",              "",                       "input_bar",              0, 0, 0, true,  false},
  {Function::AddTextLabel,          "add_text_label",          "text",          "text",                   "text-label",             1, 1, 1, true,  false},
  {Function::DrawPoint,             "draw_point",              "points",        "point",                  "point",                  1, 1, 0, false, false},
  {Function::MidpointOrCenter,      "midpoint_or_center",      "points",        "midpoint",               "point",                  2, 2, 2, false, false},
  {Function::DrawSegment,           "draw_segment",            "lines",         "segment",                "segment",                2, 2, 2, false, false},
  {Function::DrawLine,              "draw_line",               "lines",         "line",                   "line",                   2, 2, 2, false, false},
  {Function::DrawRay,               "draw_ray",                "lines",         "ray",                    "ray",                    2, 2, 2, false, false},
  {Function::PerpendicularLine,     "perpendicular_line",      "constructions", "perpendicular_line",     "perpendicular-line",     2, 2, 2, false, true},
  {Function::ParallelLine,          "parallel_line",           "constructions", "parallel_line",          "parallel-line",          2, 2, 2, false, true},
  {Function::PerpendicularBisector, "perpendicular_bisector",  "constructions", "perpendicular_bisector", "perpendicular-bisector", 2, 2, 2, false, true},
  {Function::AngleBisector,         "angle_bisector",          "constructions", "angle_bisector",         "angle-bisector",         3, 3, 3, false, true},
  {Function::Tangents,              "tangents",                "constructions", "tangents",               "tangent-pair",           2, 2, 2, false, true},
  {Function::DrawPolygon,           "draw_polygon",            "polygons",      "polygon",                "polygon",                kVariableArity, 3, 0, false, false},
  {Function::DrawCircleCenterPoint, "draw_circle_center_point","circles",       "circle_center_point",    "circle",                 2, 2, 2, false, false},
  {Function::Semicircle,            "semicircle",              "circles",       "semicircle",             "semicircle",             2, 2, 2, false, false},
  {Function::CircularSector,        "circular_sector",         "circles",       "circular_sector",        "circular-sector",        3, 3, 3, false, false},
  {Function::Parabola,              "parabola",                "conics",        "parabola",               "parabola",               2, 2, 2, false, false},
  {Function::Hyperbola,             "hyperbola",               "conics",        "hyperbola",              "hyperbola",              3, 3, 3, false, false},
}};
// clang-format on

constexpr std::array<std::string_view, 7> kCategories{"points", "lines", "constructions", "polygons",
                                                      "circles", "conics", "text"};

double pixel_distance(const Viewport& v, Vec2 a, Vec2 b) { return distance(project(v, a), project(v, b)); }

bool can_host(const GeoObject& o) {
  return !o.is_point() && o.variant != Variant::TextLabel && o.variant != Variant::Expression;
}

template <typename Pred>
std::optional<ObjectId> nearest_object(const Scene& s, Vec2 p, double snap_px, Pred pred) {
  std::optional<ObjectId> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const GeoObject& o : s.objects()) {
    if (!pred(o)) continue;
    const double d = pixel_distance(s.viewport(), closest_point(o, p), p);
    if (d <= snap_px && d < best_d) {
      best_d = d;
      best = o.id;
    }
  }
  return best;
}

ObjectId resolve_point(Scene& s, Vec2 p, double snap_px, CommitResult& result) {
  if (auto hit = nearest_object(s, p, snap_px, [](const GeoObject& o) { return o.is_point(); })) {
    result.reused.push_back(*hit);
    return *hit;
  }
  ObjectSpec spec;
  spec.variant = Variant::Point;
  if (auto host = nearest_object(s, p, snap_px, can_host)) {
    spec.point_kind = PointKind::OnObject;
    spec.inputs = {*host, p};
    result.reused.push_back(*host);
  } else {
    spec.point_kind = PointKind::Free;
    spec.inputs = {p};
  }
  const ObjectId id = s.add_object(spec);
  result.created.push_back(id);
  return id;
}

ObjectId resolve_host(Scene& s, Vec2 p, double snap_px, bool (*accept)(const GeoObject&), std::string_view what,
                      CommitResult& result) {
  auto host = nearest_object(s, p, snap_px, accept);
  if (!host) throw Error(ErrorCode::UnresolvedRef, "no " + std::string(what) + " under the selected location");
  result.reused.push_back(*host);
  return *host;
}

ObjectId add(Scene& s, CommitResult& result, Variant v, std::vector<Input> inputs, std::string text = {},
             std::string label = {}) {
  ObjectSpec spec;
  spec.variant = v;
  spec.inputs = std::move(inputs);
  spec.text = std::move(text);
  spec.label = std::move(label);
  const ObjectId id = s.add_object(spec);
  result.created.push_back(id);
  return id;
}

Variant variant_for(Function fn) {
  switch (fn) {
    case Function::DrawSegment: return Variant::Segment;
    case Function::DrawLine: return Variant::Line;
    case Function::DrawRay: return Variant::Ray;
    case Function::PerpendicularBisector: return Variant::PerpendicularBisector;
    case Function::AngleBisector: return Variant::AngleBisector;
    case Function::DrawPolygon: return Variant::Polygon;
    case Function::DrawCircleCenterPoint: return Variant::Circle;
    case Function::Semicircle: return Variant::Semicircle;
    case Function::CircularSector: return Variant::CircularSector;
    case Function::Parabola: return Variant::Parabola;
    case Function::Hyperbola: return Variant::Hyperbola;
    default: return Variant::Point;
  }
}

}  // namespace

std::span<const FunctionInfo> function_table() { return kTable; }

const FunctionInfo& info(Function f) { return kTable[static_cast<std::size_t>(f)]; }

std::optional<Function> function_from_name(std::string_view name) {
  for (const FunctionInfo& fi : kTable) {
    if (fi.name == name) return fi.function;
  }
  return std::nullopt;
}

std::span<const std::string_view> categories() { return kCategories; }

CommitResult commit_function(Scene& scene, Function fn, std::span<const Vec2> pts, std::string_view text,
                             double snap_px) {
  const FunctionInfo& fi = info(fn);
  const std::size_t n = pts.size();
  const bool count_ok = fi.max_points == 0 ? n >= static_cast<std::size_t>(fi.min_points)
                                           : n == static_cast<std::size_t>(fi.min_points);
  if (!count_ok && fn != Function::DrawPoint) {
    throw Error(ErrorCode::MalformedSpec, std::string(fi.name) + ": wrong number of points (" + std::to_string(n) + ")");
  }
  if (fn == Function::DrawPoint && n != 1) {
    throw Error(ErrorCode::MalformedSpec, "draw_point commits one point at a time");
  }
  if (fi.takes_text && text.empty()) throw Error(ErrorCode::MalformedSpec, std::string(fi.name) + ": empty text");

  Scene work = scene;
  CommitResult result;
  const auto point = [&](std::size_t i) -> Input { return resolve_point(work, pts[i], snap_px, result); };

  switch (fn) {
    case Function::GenerateInputAction: {
      static const std::regex kPointDef(
          R"(^\s*([A-Za-z][A-Za-z0-9_]*)\s*=\s*\(\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*,\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*\)\s*$)");
      std::smatch m;
      const std::string t(text);
      if (std::regex_match(t, m, kPointDef)) {
        ObjectSpec spec;
        spec.variant = Variant::Point;
        spec.inputs = {Vec2{std::stod(m[2].str()), std::stod(m[3].str())}};
        spec.label = m[1].str();
        result.created.push_back(work.add_object(spec));
      } else {
        add(work, result, Variant::Expression, {}, t);
      }
      break;
    }
    case Function::AddTextLabel:
      add(work, result, Variant::TextLabel, {pts[0]}, std::string(text));
      break;
    case Function::DrawPoint:
      point(0);
      break;
    case Function::MidpointOrCenter: {
      ObjectSpec spec;
      spec.variant = Variant::Point;
      spec.point_kind = PointKind::Midpoint;
      spec.inputs = {point(0), point(1)};
      result.created.push_back(work.add_object(spec));
      break;
    }
    case Function::PerpendicularLine:
    case Function::ParallelLine: {
      const Input base = resolve_host(work, pts[0], snap_px, [](const GeoObject& o) { return is_linear(o.variant); },
                                      "line, segment or ray", result);
      const Input through = point(1);
      add(work, result, fn == Function::ParallelLine ? Variant::ParallelLine : Variant::PerpendicularLine,
          {base, through});
      break;
    }
    case Function::Tangents: {
      const Input ext = point(0);
      const Input circle = resolve_host(
          work, pts[1], snap_px, [](const GeoObject& o) { return o.variant == Variant::Circle; }, "circle", result);
      add(work, result, Variant::TangentPair, {ext, circle});
      break;
    }
    default: {
      std::vector<Input> inputs;
      for (std::size_t i = 0; i < n; ++i) inputs.push_back(point(i));
      add(work, result, variant_for(fn), std::move(inputs));
      break;
    }
  }
  scene = std::move(work);
  return result;
}

}  // namespace gcsim
