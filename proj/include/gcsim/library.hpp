#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcsim/scene.hpp"

namespace gcsim {

/// The allowed function library.
enum class Function {
  GenerateInputAction,
  AddTextLabel,
  DrawPoint,
  MidpointOrCenter,
  DrawSegment,
  DrawLine,
  DrawRay,
  PerpendicularLine,
  ParallelLine,
  PerpendicularBisector,
  AngleBisector,
  Tangents,
  DrawPolygon,
  DrawCircleCenterPoint,
  Semicircle,
  CircularSector,
  Parabola,
  Hyperbola,
};

inline constexpr int kFunctionCount = 18;

/// Number of paints that commit one object when the tool is active.
/// `VariableArity` marks the polygon tool (closed by re-painting the first vertex).
inline constexpr int kVariableArity = -1;

struct FunctionInfo {
  Function function;
  std::string_view name;         // plan-level function name
  std::string_view category;     // tool-category button; empty for the input bar
  std::string_view tool;         // tool button; empty for the input bar
  std::string_view object_type;  // `o` carried by paint/type actions
  int arity;                     // paints per commit
  int min_points;                // exact point count unless max_points == 0
  int max_points;                // 0: unbounded
  bool takes_text;
  bool requires_existing;  // construction functions: inputs must already exist
};

std::span<const FunctionInfo> function_table();
const FunctionInfo& info(Function f);
std::optional<Function> function_from_name(std::string_view name);

/// Tool categories in palette order.
std::span<const std::string_view> categories();

/// Pixel snapping radius for attaching paints to existing points/objects.
inline constexpr double kSnapPixels = 15.0;

struct CommitResult {
  std::vector<ObjectId> created;
  std::vector<ObjectId> reused;  // existing points/objects picked up by the paints
  std::string log;
};

/// Resolves paint locations (world coordinates) against the scene and adds
/// the function's object(s). Existing points within `snap_px` (screen
/// distance) are reused, otherwise points attach to the nearest object within
/// `snap_px`, otherwise free points are created. Transactional: on failure the
/// scene is untouched and an Error is thrown.
CommitResult commit_function(Scene& scene, Function fn, std::span<const Vec2> world_points, std::string_view text = {},
                             double snap_px = kSnapPixels);

}  // namespace gcsim
