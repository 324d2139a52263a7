#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcsim/action.hpp"
#include "gcsim/environment.hpp"
#include "gcsim/graph.hpp"
#include "gcsim/plan.hpp"

namespace gcsim {

struct RewardParams {
  double lambda_a = 0.3;
  double lambda_p = 0.7;
  double lambda_g = 1.0;
  double sigma_p = 10.0;  // pixels
  double sigma_g = 1.0;   // d_geo units

  double mismatch() const { return 10.0 * sigma_p; }
  /// Throws Error(BadConfig).
  void validate() const;
  nlohmann::json to_json() const;
  static RewardParams from_json(const nlohmann::json& j);
};

/// An admissible action. Clicks are valid anywhere inside `region`.
struct Candidate {
  Action action;
  std::optional<BBox> region;
  int task_index = -1;
};

struct AdmissibleSet {
  int step_index = 0;
  std::vector<Candidate> candidates;
  bool terminal = false;  // the state already realizes the reference
};

/// Reference construction plus the precomputed dependency graph.
struct AdmissibleContext {
  TaskPlan plan;
  ReferenceConstruction reference;
  ConstructionGraph graph;
  ToolPalette palette = ToolPalette::standard();

  AdmissibleContext(TaskPlan plan, const Viewport& viewport);
};

/// Screen tolerance for counting a reference object as present.
inline constexpr double kSatisfiedPixels = 5.0;

/// True when `scene` holds an object of the same variant (and text) whose
/// anchors all lie within kSatisfiedPixels of `ref`'s.
bool object_present(const Scene& scene, const GeoObject& ref);

/// Which tasks the state already realizes.
std::vector<bool> satisfied_tasks(const AdmissibleContext& ctx, const EnvState& state);

/// Actions that advance any unsatisfied task whose dependencies are met.
/// Returns the terminal-only set (terminal = true, no candidates) when the
/// reference is exhausted.
AdmissibleSet admissible_set(const AdmissibleContext& ctx, const EnvState& state);

/// Throws Error(KindMismatch) when the kinds differ.
double action_distance(const Action& pred, const Candidate& gt, const Viewport& viewport, const RewardParams& params);

/// Throws Error(EmptyAdmissibleSet) for an empty non-terminal set. A
/// terminal set admits no further action: reward 0.
double step_reward(const Action& pred, const AdmissibleSet& set, const Viewport& viewport, const RewardParams& params);

/// Pairwise relations of a reference scene.
enum class RelationKind { Incidence, Parallel, Perpendicular, EqualRadius };

std::string_view to_string(RelationKind k);

struct Relation {
  RelationKind kind;
  ObjectId a;  // incidence: the point
  ObjectId b;  // incidence: the carrier
};

std::vector<Relation> find_relations(const Scene& scene, double tol = kEpsGeo);
bool relation_holds(const Scene& scene, const Relation& r, double tol);

struct GeoWeights {
  double anchor = 1.0;
  double relation = 1.0;
  double label = 0.5;
  double unmatched_penalty = 1.0;  // world units
  double relation_tol = 1e-4;      // checking tolerance in the constructed scene
};

struct GeoDistance {
  double anchor_term = 0.0;
  double relation_term = 0.0;
  double label_term = 0.0;
  double total = 0.0;
  int matched = 0;
  int unmatched = 0;
  int relations = 0;
  int violated = 0;
  int labels_matched = 0;
  int labels_unmatched = 0;
  /// reference object id -> constructed object id for matched shapes.
  std::vector<std::pair<ObjectId, ObjectId>> matches;
};

/// Greedy variant-respecting matching of `hat` against `star`.
GeoDistance geo_distance_breakdown(const Scene& hat, const Scene& star, const GeoWeights& w = {});
double geo_distance(const Scene& hat, const Scene& star, const GeoWeights& w = {});

struct TrajectoryReward {
  std::vector<double> step_rewards;
  double mean_step = 0.0;
  double d_geo = 0.0;
  double validity = 0.0;  // lambda_g * exp(-d_geo / sigma_g)
  double total = 0.0;

  nlohmann::json to_json() const;
};

/// Replays the trajectory, scoring each action against the admissible set of
/// the state it was taken in, then adds the final-scene validity term.
/// Throws EmptyTrajectory or NoPlan (the plan travels with the trajectory).
TrajectoryReward trajectory_reward(const Trajectory& traj, const Scene& reference, const RewardParams& params,
                                   const AdmissibleContext* ctx = nullptr);

}  // namespace gcsim
