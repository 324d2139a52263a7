#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcsim/action.hpp"
#include "gcsim/palette.hpp"
#include "gcsim/plan.hpp"
#include "gcsim/raster.hpp"
#include "gcsim/scene.hpp"

namespace gcsim {

enum class ScreenshotMode { None, Hash, Files };

struct EnvConfig {
  Viewport viewport;
  double snap_px = kSnapPixels;
  double polygon_close_px = 3.0;
  ScreenshotMode screenshots = ScreenshotMode::Hash;
  std::filesystem::path output_dir;     // Files mode: rasters are written here
  std::string screenshot_prefix = "step";
  int step_budget = 1000;

  /// Throws Error(BadConfig).
  void validate() const;
  nlohmann::json to_json() const;
  static EnvConfig from_json(const nlohmann::json& j);
  static EnvConfig from_json(const nlohmann::json& j, EnvConfig base);
};

/// Everything step() reads and writes.
struct EnvState {
  Scene scene;
  ToolPalette palette;
  bool input_focus = false;
  std::vector<Vec2> pending;          // world positions painted with the active tool
  std::vector<Vec2> pending_pixels;   // the same paints in screen pixels
  std::optional<Vec2> pending_label;  // text tool: position waiting for its text
  int step_index = 0;

  std::string hash() const;
};

EnvState reset(const ProblemSpec& problem, const EnvConfig& config);

enum class TargetKind { CategoryButton, ToolButton, InputBar, Canvas, DeadZone };

std::string_view to_string(TargetKind k);

struct HitTarget {
  TargetKind kind = TargetKind::DeadZone;
  std::string name;  // button name, "canvas" or "dead_zone"
  BBox bbox;         // the element's box (canvas rectangle; the pixel itself for dead zones)
  BBox hit_range;    // integer pixel rectangle accepted for this element, inclusive
};

HitTarget hit_test(const EnvState& state, Vec2 pixel);

/// Canvas rectangle in screen pixels (right of the palette column).
BBox canvas_region(const Viewport& viewport);

struct ScreenshotRef {
  std::string path;  // relative to the trajectory file; empty when not written
  std::string sha256;
};

struct StepRecord {
  ScreenshotRef screenshot;  // observation the action was chosen from
  std::string present_task;
  std::vector<Action> previous_actions;
  bool exe_success = false;
  std::string exe_log;
  std::optional<Action> next_action;  // nullopt: terminal
  Action action;
  // Click provenance.
  std::optional<BBox> bbox;
  std::optional<BBox> hit_range;
  std::optional<Vec2> normalized_coords;

  nlohmann::json to_json() const;
  static StepRecord from_json(const nlohmann::json& j);
};

struct StepResult {
  EnvState state;
  StepRecord record;
};

/// Applies one action. Never throws for action-level failures; those are
/// reported through exe_success/exe_log. `observation` is the rendering of
/// `state` if the caller already has one.
StepResult step(const EnvState& state, const Action& action, const EnvConfig& config,
                const std::vector<Action>& previous_actions = {}, std::string present_task = {},
                const Raster* observation = nullptr);

struct Observation {
  const EnvState* state = nullptr;
  const Raster* raster = nullptr;  // null unless the policy asked for pixels
  std::string present_task;
  std::span<const Action> previous_actions;
  int step_index = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  /// nullopt ends the episode.
  virtual std::optional<Action> next(const Observation& obs) = 0;
  virtual bool wants_raster() const { return false; }
};

struct Trajectory {
  std::string problem_id;
  EnvConfig config;  // viewport and step parameters the run used
  std::optional<TaskPlan> plan;
  std::string initial_state_hash;
  std::vector<StepRecord> steps;
  std::vector<std::string> state_hashes;  // after each step
  Scene final_scene;
  std::string final_state_hash;
  bool truncated = false;
  std::string truncation_reason;

  std::vector<Action> actions() const;
};

/// Present-task text per step index from the oracle lowering; empty when
/// the problem has no (valid) plan.
std::vector<std::string> task_schedule(const ProblemSpec& problem, const Viewport& viewport);

Trajectory run_policy(const ProblemSpec& problem, Policy& policy, const EnvConfig& config);

/// Executes a fixed action list (no rendering unless configured).
Trajectory run_actions(const ProblemSpec& problem, std::span<const Action> actions, const EnvConfig& config);

/// Writes `<path>` (one StepRecord per line) and `<path>.meta.json`.
void write_trajectory(const Trajectory& traj, const std::filesystem::path& path);
/// Reads both files; throws Error(Io) or Error(MalformedSpec).
Trajectory read_trajectory(const std::filesystem::path& path);
std::filesystem::path meta_path(const std::filesystem::path& trajectory_path);

struct ReplayReport {
  bool ok = true;
  int first_mismatch = -1;  // step index, or -1
  std::vector<std::string> problems;
};

/// Re-executes the recorded actions from the initial state and compares every
/// state hash, execution result and (when present) screenshot hash.
ReplayReport replay(const Trajectory& traj, const std::filesystem::path& base_dir = {});

/// Replay plus on-disk integrity: each JSONL line must match the digest in the sidecar.
ReplayReport replay_file(const std::filesystem::path& path);

}  // namespace gcsim
