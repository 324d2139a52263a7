#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcsim/action.hpp"
#include "gcsim/environment.hpp"
#include "gcsim/raster.hpp"
#include "gcsim/reward.hpp"
#include "gcsim/scene.hpp"

namespace gcsim {

/// Paint tolerance on the fixed 1280x720 evaluation screen.
inline constexpr double kPaintTolerancePx = 5.0;
// Absorbs representation error of pixel offsets in normalized coordinates.
inline constexpr double kPaintSlackPx = 1e-9;
inline constexpr double kEvalScreenWidth = 1280.0;
inline constexpr double kEvalScreenHeight = 720.0;

/// Per-kind parameter rule. Different kinds are never correct. Throws
/// Error(MissingAnnotation) for a click annotation without a box.
bool parameter_correct(const Action& pred, const Action& gt);

/// Ground-truth action sequence with click boxes and task grouping.
struct GroundTruth {
  std::vector<Action> actions;
  std::vector<int> task_of_step;

  static GroundTruth from_plan(const TaskPlan& plan, const Viewport& viewport);
  /// Uses recorded click boxes; tasks are runs of equal present_task text.
  static GroundTruth from_trajectory(const Trajectory& traj);
};

struct StepFlags {
  bool type_ok = false;
  bool param_ok = false;
};

struct TaskMetrics {
  int task_index = 0;
  int steps = 0;
  double aa = 0, pa = 0, ssr = 0;
  bool success = false;
};

struct MiddleMetrics {
  double aa = 0, pa = 0, ssr = 0, tsr = 0, mps = 0;
  std::vector<TaskMetrics> tasks;
  std::vector<StepFlags> steps;
};

double middle_process_score(double tsr, double ssr, double pa, double aa);

/// Positional alignment; missing predictions are incorrect. Metrics are
/// computed per task and averaged over tasks. Throws EmptyReference.
MiddleMetrics middle_metrics(std::span<const Action> pred, const GroundTruth& gt);

struct OtcScore {
  double s_point = 0, s_cmd = 0, otc = 0;
};

inline constexpr double kPointTolerance = 0.5;

/// (name, sorted point indices) for every constructed object.
struct Command {
  std::string name;
  std::vector<int> inputs;
  friend auto operator<=>(const Command&, const Command&) = default;
};

/// Commands of `scene`, with point inputs mapped through `point_index`
/// (indexed by object id; -1 when unmapped).
std::vector<Command> scene_commands(const Scene& scene, const std::vector<int>& point_index);

/// Throws EmptyReference when `star` has no objects.
OtcScore otc_score(const Scene& hat, const Scene& star);

struct JudgeScores {
  double tc = 0, vs = 0, gl = 0;
  std::string provider;  // "external" or "rule-based-fallback"
};

/// Externally supplied scores keyed by problem id.
class JudgeFile {
 public:
  JudgeFile() = default;
  explicit JudgeFile(const nlohmann::json& j);
  static JudgeFile load(const std::filesystem::path& path);
  std::optional<JudgeScores> lookup(const std::string& problem_id) const;

 private:
  std::map<std::string, JudgeScores, std::less<>> scores_;
};

/// Rule-based surrogate: TC = s_cmd, VS = 1 - mean raster difference, GL =
/// fraction of reference relations preserved (fraction of reference objects
/// present when there are none).
JudgeScores fallback_judge(const Scene& hat, const Scene& star);

JudgeScores judge(const std::string& problem_id, const Scene& hat, const Scene& star, const JudgeFile* provider);

/// Throws OutOfRange unless every input lies in [0, 1].
double final_result_score(double otc, double tc, double vs, double gl);
double overall_score(double mps, double frs);

struct ScoreReport {
  std::string problem_id;
  int problems = 1;
  double aa = 0, pa = 0, ssr = 0, tsr = 0, mps = 0;
  OtcScore otc;
  JudgeScores judge;
  double frs = 0, os = 0;
  std::vector<TaskMetrics> tasks;
  std::vector<StepFlags> steps;
  std::optional<TrajectoryReward> reward;

  nlohmann::json to_json() const;
  std::string table() const;
};

ScoreReport score(const std::string& problem_id, std::span<const Action> pred, const GroundTruth& gt, const Scene& hat,
                  const Scene& star, const JudgeFile* provider = nullptr);

/// Macro average across problems; MPS, FRS and OS are recombined from the averaged parts.
ScoreReport aggregate(std::span<const ScoreReport> reports);

}  // namespace gcsim
