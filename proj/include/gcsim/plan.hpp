#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gcsim/library.hpp"
#include "gcsim/scene.hpp"

namespace gcsim {

/// World-distance below which an unmatched reference point is reported as
/// "near but off" an object rather than floating.
inline constexpr double kNearObjectTolerance = 0.05;

struct Task {
  Function function = Function::DrawPoint;
  std::vector<Vec2> points;  // "points" or the single "position"
  std::string text;

  /// Canonical `name {args}` string, used as the present-task text.
  std::string describe() const;
  nlohmann::json args() const;
  /// World locations painted for this task, in order. The polygon tool gets
  /// its first vertex repeated to close the shape.
  std::vector<Vec2> paint_targets() const;
};

enum class Difficulty { Beginner, Intermediate, Advanced };

struct TaskPlan {
  std::string description;
  std::string grade_level;
  std::optional<Difficulty> drawing_difficulty;
  std::vector<std::string> skills;
  std::vector<Task> tasks;

  nlohmann::json to_json() const;
};

enum class DiagCode { FloatingRef, UseBeforeCreate, OffObject, MalformedTask, UnknownFunction };

std::string_view to_string(DiagCode c);

struct Diagnostic {
  DiagCode code = DiagCode::MalformedTask;
  int task_index = -1;
  std::string message;
  int plan_index = 0;
};

struct ParseResult {
  std::vector<TaskPlan> plans;
  std::vector<Diagnostic> diagnostics;  // non-empty: rejected
  std::vector<std::string> warnings;    // repaired malformations

  bool ok() const { return diagnostics.empty() && !plans.empty(); }
};

/// Parses and standardizes the plan text (one plan object or an array of
/// them). Lossless syntactic repairs (trailing commas, numeric strings,
/// escaped underscores, {x,y} points, whitespace/case in names) are applied
/// and reported as warnings.
ParseResult parse_plan(std::string_view raw);

/// Parses an already-decoded plan object.
ParseResult parse_plan_json(const nlohmann::json& j);

/// Dependency rules over the plan; empty result means valid.
std::vector<Diagnostic> validate_dependencies(const TaskPlan& plan, double eps = kEpsGeo);

struct TaskTrace {
  std::vector<ObjectId> created;
  std::vector<ObjectId> reused;
  std::string error;  // lenient builds record failures here
};

struct ReferenceConstruction {
  Scene scene;
  std::vector<TaskTrace> tasks;
};

struct BuildOptions {
  double snap_px = kSnapPixels;
  bool lenient = false;  // skip failing commits instead of throwing
  /// (task index, point index) -> replacement world coordinate.
  std::map<std::pair<int, int>, Vec2> overrides;
};

/// Applies the plan directly through the geometry core with the same point
/// resolution the canvas uses. Throws on the first failing task unless lenient.
ReferenceConstruction build_reference(const TaskPlan& plan, const Viewport& viewport, const BuildOptions& options = {});

struct ProblemSpec {
  std::string id;
  std::string instruction;
  std::optional<Viewport> viewport;
  std::optional<Scene> reference_construction;
  std::optional<TaskPlan> plan;

  Viewport effective_viewport(const Viewport& fallback = {}) const { return viewport.value_or(fallback); }
  nlohmann::json to_json() const;
};

/// Reads either a problem object ({"id", "instruction", "plan", ...}) or a
/// bare plan (object or single-element array). Throws Error(MalformedTask)
/// carrying the first diagnostic when the plan is rejected.
ProblemSpec load_problem(std::string_view raw, std::string_view fallback_id = "problem");
ProblemSpec problem_from_json(const nlohmann::json& j, std::string_view fallback_id = "problem");

}  // namespace gcsim
