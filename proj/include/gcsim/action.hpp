#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gcsim/geometry.hpp"

namespace gcsim {

enum class ActionKind { Click, Paint, Type };

std::string_view to_string(ActionKind k);
std::optional<ActionKind> action_kind_from_string(std::string_view s);

/// Axis-aligned pixel rectangle; containment is inclusive on every edge.
struct BBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  bool contains(Vec2 p) const { return x_min <= p.x && p.x <= x_max && y_min <= p.y && p.y <= y_max; }
  Vec2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool overlaps(const BBox& o) const {
    return !(o.x_min > x_max || x_min > o.x_max || o.y_min > y_max || y_min > o.y_max);
  }
  friend bool operator==(const BBox&, const BBox&) = default;
};

nlohmann::json to_json(const BBox& b);
BBox bbox_from_json(const nlohmann::json& j);

/// One GUI action (kind, object type, typed parameters).
///   click: `point` in screen pixels; `target` optionally annotates the intended button box
///   paint: `point` in normalized canvas coordinates ([0,1]^2 when on canvas)
///   type:  `text`
struct Action {
  ActionKind kind = ActionKind::Click;
  std::string object_type;
  Vec2 point;
  std::string text;
  std::optional<BBox> target;

  static Action click(std::string object_type, Vec2 pixel, std::optional<BBox> target = std::nullopt);
  static Action paint(std::string object_type, Vec2 normalized);
  static Action type(std::string object_type, std::string text);

  /// The typed parameter block only.
  nlohmann::json params() const;
  nlohmann::json to_json() const;
  /// Throws Error(MalformedSpec) on bad shape.
  static Action from_json(const nlohmann::json& j);

  friend bool operator==(const Action&, const Action&) = default;
};

}  // namespace gcsim
