#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gcsim/geometry.hpp"

namespace gcsim {

using ObjectId = std::int32_t;

enum class Variant {
  Point,
  Segment,
  Line,
  Ray,
  Circle,
  Semicircle,
  CircularSector,
  Polygon,
  Parabola,
  Hyperbola,
  PerpendicularLine,
  ParallelLine,
  PerpendicularBisector,
  AngleBisector,
  TangentPair,
  TextLabel,
  Expression,  // free-form text committed through the input bar
};

std::string_view to_string(Variant v);
std::optional<Variant> variant_from_string(std::string_view name);

/// Objects whose carrier is a single straight line.
bool is_linear(Variant v);

enum class PointKind { Free, Midpoint, OnObject };

std::string_view to_string(PointKind k);

/// A defining input: an existing object id or a raw world coordinate.
using Input = std::variant<ObjectId, Vec2>;

struct Style {
  std::uint8_t r = 0, g = 0, b = 0;
  int stroke_width = 2;
  friend bool operator==(const Style&, const Style&) = default;
};

/// What the caller asks for. Input roles per variant:
///   Point/Free [raw]          Point/Midpoint [pt, pt]    Point/OnObject [obj, raw]
///   Segment, Line, Ray, Semicircle, PerpendicularBisector [pt, pt]
///   Circle [center, on]       CircularSector [center, start, end]
///   Polygon [pt x n>=3]       Parabola [focus, directrix pt]   Hyperbola [f1, f2, on]
///   PerpendicularLine, ParallelLine [linear obj, through pt]
///   AngleBisector [arm, vertex, arm]      TangentPair [external pt, circle]
///   TextLabel [raw position] + text       Expression [] + text
struct ObjectSpec {
  Variant variant = Variant::Point;
  PointKind point_kind = PointKind::Free;
  std::vector<Input> inputs;
  std::string text;
  std::string label;  // empty: assign automatically
  std::optional<Style> style;
};

struct GeoObject {
  ObjectId id = -1;
  std::string label;
  Variant variant = Variant::Point;
  PointKind point_kind = PointKind::Free;
  std::vector<Input> inputs;
  std::string text;
  Style style;

  // Evaluated geometry, see evaluate_object().
  std::vector<Vec2> coords;
  std::vector<Line> lines;
  double constant = 0.0;  // hyperbola: |d1 - d2|

  bool is_point() const { return variant == Variant::Point; }
  Vec2 position() const { return coords.front(); }
  /// Ids among inputs, in role order.
  std::vector<ObjectId> ref_ids() const;
};

class Scene;

/// Evaluates an object's geometry from its inputs against `scene`. Throws
/// UnresolvedRef, MalformedSpec or DegenerateInput.
void evaluate_object(GeoObject& obj, const Scene& scene);

/// Euclidean distance from p to the object's point set (boundary for
/// polygons and sectors). +inf for labels and expressions.
double distance_to(const GeoObject& obj, Vec2 p);
/// Nearest point of the object to p.
Vec2 closest_point(const GeoObject& obj, Vec2 p);
bool point_on_object(const GeoObject& obj, Vec2 p, double tol);

/// Canonical anchor points, deterministic per variant.
std::vector<Vec2> anchors(const GeoObject& obj);

/// Sampled polyline(s) of the object restricted roughly to `window`, used by
/// the renderer. Straight carriers are clipped to the window.
std::vector<std::vector<Vec2>> outline(const GeoObject& obj, const Viewport& window);

/// Ordered object table; insertion order is creation order.
class Scene {
 public:
  explicit Scene(Viewport viewport = {});

  const Viewport& viewport() const { return viewport_; }
  std::span<const GeoObject> objects() const { return objects_; }
  std::size_t size() const { return objects_.size(); }
  bool empty() const { return objects_.empty(); }

  const GeoObject* find(ObjectId id) const;
  const GeoObject& at(ObjectId id) const;
  std::optional<ObjectId> find_label(std::string_view label) const;

  /// Validates, evaluates eagerly and appends. Throws UnresolvedRef or
  /// MalformedSpec; the scene is unchanged on failure.
  ObjectId add_object(const ObjectSpec& spec);

  /// Re-evaluates every object from its inputs and checks the stored
  /// geometry within `tol`. Returns an empty string when consistent.
  std::string verify(double tol = kEpsGeo) const;

  nlohmann::json to_json() const;
  static Scene from_json(const nlohmann::json& j);
  /// SHA-256 over the canonical JSON form.
  std::string hash() const;

 private:
  std::string next_label(Variant v);

  Viewport viewport_;
  std::vector<GeoObject> objects_;
  std::map<std::string, ObjectId, std::less<>> labels_;
  int point_labels_ = 0;
  int other_labels_ = 0;
};

nlohmann::json to_json(const Viewport& v);
Viewport viewport_from_json(const nlohmann::json& j);

}  // namespace gcsim
