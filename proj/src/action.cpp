#include "gcsim/action.hpp"

#include "gcsim/error.hpp"

namespace gcsim {

using nlohmann::json;

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::Click: return "click";
    case ActionKind::Paint: return "paint";
    case ActionKind::Type: return "type";
  }
  return "unknown";
}

std::optional<ActionKind> action_kind_from_string(std::string_view s) {
  if (s == "click") return ActionKind::Click;
  if (s == "paint") return ActionKind::Paint;
  if (s == "type") return ActionKind::Type;
  return std::nullopt;
}

json to_json(const BBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

BBox bbox_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::MalformedSpec, "bbox must be [x_min, y_min, x_max, y_max]");
  return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Action Action::click(std::string object_type, Vec2 pixel, std::optional<BBox> target) {
  return Action{ActionKind::Click, std::move(object_type), pixel, {}, target};
}

Action Action::paint(std::string object_type, Vec2 normalized) {
  return Action{ActionKind::Paint, std::move(object_type), normalized, {}, std::nullopt};
}

Action Action::type(std::string object_type, std::string text) {
  return Action{ActionKind::Type, std::move(object_type), {}, std::move(text), std::nullopt};
}

json Action::params() const {
  if (kind == ActionKind::Type) return json{{"text", text}};
  return json{{"x", point.x}, {"y", point.y}};
}

json Action::to_json() const {
  json j{{"kind", gcsim::to_string(kind)}, {"object_type", object_type}, {"params", params()}};
  if (target) j["bbox"] = gcsim::to_json(*target);
  return j;
}

Action Action::from_json(const json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::MalformedSpec, "action must be an object");
    const auto kind = action_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::MalformedSpec, "unknown action kind " + j.at("kind").dump());
    Action a;
    a.kind = *kind;
    a.object_type = j.value("object_type", std::string());
    const json& p = j.at("params");
    if (a.kind == ActionKind::Type) {
      a.text = p.at("text").get<std::string>();
    } else {
      a.point = Vec2{p.at("x").get<double>(), p.at("y").get<double>()};
    }
    if (j.contains("bbox")) a.target = bbox_from_json(j.at("bbox"));
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedSpec, std::string("bad action: ") + e.what());
  }
}

}  // namespace gcsim
