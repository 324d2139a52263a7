#include "gcsim/policy.hpp"

#include "gcsim/error.hpp"

namespace gcsim {

OraclePolicy OraclePolicy::for_problem(const ProblemSpec& problem, const Viewport& viewport) {
  if (!problem.plan) throw Error(ErrorCode::NoPlan, "problem '" + problem.id + "' has no plan");
  return OraclePolicy(lower(*problem.plan, ToolPalette::standard(), viewport).flatten());
}

std::vector<Action> noisy_actions(const LoweredProgram& program, const Viewport& viewport, double sigma_px,
                                  std::mt19937_64& rng, std::optional<int> only_task) {
  if (!(sigma_px >= 0.0)) throw Error(ErrorCode::BadConfig, "noise sigma must be >= 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Action> out;
  for (const ActionGroup& g : program.groups) {
    const bool apply = !only_task || *only_task == g.task_index;
    std::optional<Vec2> first_paint;
    std::size_t paints = 0, total_paints = 0;
    for (const Action& a : g.actions) total_paints += a.kind == ActionKind::Paint;
    for (Action a : g.actions) {
      if (a.kind != ActionKind::Paint) {
        out.push_back(std::move(a));
        continue;
      }
      const double dx = normal(rng), dy = normal(rng);
      ++paints;
      const bool closing = a.object_type == "polygon" && paints == total_paints && first_paint;
      if (closing) {
        a.point = *first_paint;
      } else if (apply && sigma_px > 0.0) {
        a.point.x += sigma_px * dx / viewport.width;
        a.point.y += sigma_px * dy / viewport.height;
      }
      if (!first_paint) first_paint = a.point;
      out.push_back(std::move(a));
    }
  }
  return out;
}

OraclePolicy noisy_oracle(const ProblemSpec& problem, const Viewport& viewport, double sigma_px, std::uint64_t seed) {
  if (!problem.plan) throw Error(ErrorCode::NoPlan, "problem '" + problem.id + "' has no plan");
  std::mt19937_64 rng(seed);
  const LoweredProgram prog = lower(*problem.plan, ToolPalette::standard(), viewport);
  return OraclePolicy(noisy_actions(prog, viewport, sigma_px, rng));
}

}  // namespace gcsim
