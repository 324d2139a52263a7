#pragma once

#include <vector>

#include <json.hpp>

#include "gcsim/action.hpp"
#include "gcsim/palette.hpp"
#include "gcsim/plan.hpp"

namespace gcsim {

/// Actions of one sub-task.
struct ActionGroup {
  int task_index = 0;
  std::vector<Action> actions;
};

struct LoweredProgram {
  std::vector<ActionGroup> groups;

  std::vector<Action> flatten() const;
  std::size_t action_count() const;
  /// Task index of every flattened action.
  std::vector<int> task_of_step() const;

  nlohmann::json to_json() const;
  static LoweredProgram from_json(const nlohmann::json& j);
};

/// Normalized canvas coordinates of a world point.
Vec2 normalized_canvas(const Viewport& viewport, Vec2 world);

/// Compiles the plan into grouped click/paint/type actions. Category and
/// tool clicks are omitted when already active in the (tracked) palette
/// state. Throws Error(UseBeforeCreate) when a construction function
/// references something that does not exist yet.
LoweredProgram lower(const TaskPlan& plan, const ToolPalette& palette, const Viewport& viewport);

}  // namespace gcsim
