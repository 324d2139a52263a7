#include <doctest.h>

#include <cmath>
#include <random>

#include "gcsim/environment.hpp"
#include "gcsim/error.hpp"
#include "gcsim/lower.hpp"
#include "gcsim/policy.hpp"
#include "gcsim/reward.hpp"
#include "support.hpp"

using namespace gcsim;
using namespace gcsim::testing;

namespace {

const RewardParams kDefaults;

ObjectId add(Scene& s, Variant v, std::vector<Input> in, PointKind kind = PointKind::Free) {
  ObjectSpec spec;
  spec.variant = v;
  spec.point_kind = kind;
  spec.inputs = std::move(in);
  return s.add_object(spec);
}

bool has(const AdmissibleSet& set, ActionKind kind, const std::string& object_type) {
  for (const Candidate& c : set.candidates)
    if (c.action.kind == kind && c.action.object_type == object_type) return true;
  return false;
}

Candidate paint_at(Vec2 normalized) { return Candidate{Action::paint("point", normalized), std::nullopt, 0}; }

}  // namespace

TEST_SUITE("reward") {

TEST_CASE("admissible sets") {
  const EnvConfig cfg;
  const TaskPlan plan = plan_from(R"([{"function":"draw_point","args":{"points":[[0,0]]}},
                                     {"function":"draw_segment","args":{"points":[[1,1],[2,-1]]}}])");
  const AdmissibleContext ctx(plan, cfg.viewport);
  ProblemSpec prob;
  prob.id = "adm";
  prob.plan = plan;
  EnvState s = reset(prob, cfg);

  const AdmissibleSet fresh = admissible_set(ctx, s);
  CHECK_FALSE(fresh.terminal);
  CHECK(has(fresh, ActionKind::Click, "category:points"));
  // Both tasks are independent, so both may start.
  CHECK(has(fresh, ActionKind::Click, "category:lines"));

  const auto actions = lower(plan, ToolPalette::standard(), cfg.viewport).flatten();
  s = step(s, actions[0], cfg).state;
  s = step(s, actions[1], cfg).state;
  const AdmissibleSet tool = admissible_set(ctx, s);
  bool centre = false;
  for (const Candidate& c : tool.candidates) {
    CHECK(c.action.kind != ActionKind::Type);
    if (c.action.kind == ActionKind::Paint && distance(project(cfg.viewport, unproject(cfg.viewport, {640, 360})),
                                                       {c.action.point.x * 1280, c.action.point.y * 720}) < 1e-9)
      centre = true;
  }
  CHECK(centre);

  for (std::size_t i = 2; i < actions.size(); ++i) s = step(s, actions[i], cfg).state;
  const AdmissibleSet done = admissible_set(ctx, s);
  CHECK(done.terminal);
  CHECK(done.candidates.empty());
  CHECK(step_reward(actions.back(), done, cfg.viewport, kDefaults) == 0.0);
}

TEST_CASE("every lowered action is admissible where it is taken") {
  const EnvConfig cfg;
  for (const auto& f : corpus_files()) {
    CAPTURE(f.filename().string());
    const ProblemSpec prob = load_corpus_problem(f);
    const AdmissibleContext ctx(*prob.plan, cfg.viewport);
    EnvState s = reset(prob, cfg);
    for (const Action& a : lower(*prob.plan, ToolPalette::standard(), cfg.viewport).flatten()) {
      const AdmissibleSet set = admissible_set(ctx, s);
      CHECK(step_reward(a, set, cfg.viewport, kDefaults) == doctest::Approx(1.0).epsilon(1e-12));
      s = step(s, a, cfg).state;
    }
    CHECK(admissible_set(ctx, s).terminal);
  }
}

TEST_CASE("action distance") {
  const Viewport v;
  CHECK(action_distance(Action::paint("point", {0.5, 0.5}), paint_at({0.5, 0.5}), v, kDefaults) == 0.0);
  CHECK(action_distance(Action::paint("point", {0.5 + 3.0 / 1280, 0.5}), paint_at({0.5, 0.5}), v, kDefaults) ==
        doctest::Approx(3.0).epsilon(1e-12));
  const BBox box{10, 10, 50, 30};
  const Candidate click{Action::click("tool:point", box.center(), box), box, 0};
  CHECK(action_distance(Action::click("tool:point", {10, 30}), click, v, kDefaults) == 0.0);
  CHECK(action_distance(Action::click("tool:point", {51, 20}), click, v, kDefaults) == kDefaults.mismatch());
  try {
    action_distance(Action::type("text", "x"), click, v, kDefaults);
    FAIL("expected KIND_MISMATCH");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::KindMismatch);
  }
  const Candidate text{Action::type("text", "AB=2"), std::nullopt, 0};
  CHECK(action_distance(Action::type("text", "ab=2"), text, v, kDefaults) == 0.0);
}

TEST_CASE("step reward values") {
  const Viewport v;
  const AdmissibleSet paints{0, {paint_at({0.5, 0.5})}, false};
  CHECK(step_reward(Action::paint("point", {0.5, 0.5}), paints, v, kDefaults) == doctest::Approx(1.0));
  const double at_sigma = step_reward(Action::paint("point", {0.5 + 10.0 / 1280, 0.5}), paints, v, kDefaults);
  CHECK(std::abs(at_sigma - (0.3 + 0.7 * std::exp(-1.0))) < 1e-12);
  CHECK(at_sigma == doctest::Approx(0.55752).epsilon(1e-5));

  const BBox box{10, 10, 50, 30};
  const AdmissibleSet clicks{0, {Candidate{Action::click("tool:point", box.center(), box), box, 0}}, false};
  CHECK(step_reward(Action::paint("point", {0.5, 0.5}), clicks, v, kDefaults) == 0.0);

  const AdmissibleSet empty{3, {}, false};
  try {
    step_reward(Action::paint("point", {0.5, 0.5}), empty, v, kDefaults);
    FAIL("expected EMPTY_ADMISSIBLE_SET");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyAdmissibleSet);
  }
}

TEST_CASE("reward is strictly decreasing in paint error") {
  const Viewport v;
  const AdmissibleSet paints{0, {paint_at({0.5, 0.5})}, false};
  double prev = 2.0;
  for (int px = 0; px <= 60; ++px) {
    const double r = step_reward(Action::paint("point", {0.5 + px / 1280.0, 0.5}), paints, v, kDefaults);
    CHECK(r < prev);
    CHECK(r >= 0.0);
    CHECK(r <= kDefaults.lambda_a + kDefaults.lambda_p);
    prev = r;
  }
}

TEST_CASE("params validation") {
  RewardParams p;
  p.sigma_p = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  const RewardParams q = RewardParams::from_json({{"lambda_a", 0.2}, {"sigma_g", 2.0}});
  CHECK(q.lambda_a == 0.2);
  CHECK(q.sigma_g == 2.0);
  CHECK(q.lambda_p == 0.7);
}

TEST_CASE("geometric distance") {
  Scene star;
  add(star, Variant::Point, {Vec2{1, 1}});
  CHECK(geo_distance(star, star) == 0.0);
  Scene hat;
  add(hat, Variant::Point, {Vec2{1.3, 1}});
  CHECK(geo_distance(hat, star) == doctest::Approx(0.3).epsilon(1e-12));

  Scene none;
  CHECK(geo_distance(none, star) == doctest::Approx(GeoWeights{}.unmatched_penalty));
}

TEST_CASE("relation term in isolation") {
  // Two segments meeting at a right angle; the constructed copy tilts one of them.
  Scene star, hat;
  add(star, Variant::Segment, {Vec2{0, 0}, Vec2{2, 0}});
  add(star, Variant::Segment, {Vec2{0, 0}, Vec2{0, 2}});
  add(hat, Variant::Segment, {Vec2{0, 0}, Vec2{2, 0}});
  add(hat, Variant::Segment, {Vec2{0, 0}, Vec2{0.01, 2}});
  const GeoWeights w;
  const GeoDistance d = geo_distance_breakdown(hat, star, w);
  REQUIRE(d.relations >= 1);
  CHECK(d.unmatched == 0);
  CHECK(d.violated == 1);
  CHECK(d.relation_term == doctest::Approx(w.relation / d.relations).epsilon(1e-12));
  CHECK(d.total == doctest::Approx(d.anchor_term + d.relation_term + d.label_term).epsilon(1e-12));
  bool perpendicular = false;
  for (const Relation& r : find_relations(star))
    if (r.kind == RelationKind::Perpendicular) perpendicular = true;
  CHECK(perpendicular);
}

TEST_CASE("geometric distance is symmetric for matching scenes") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int trial = 0; trial < 50; ++trial) {
    Scene a, b;
    for (int i = 0; i < 3; ++i) {
      add(a, Variant::Point, {Vec2{u(rng), u(rng)}});
      add(b, Variant::Point, {Vec2{u(rng), u(rng)}});
    }
    const GeoWeights w;
    CHECK(geo_distance_breakdown(a, b, w).anchor_term == doctest::Approx(geo_distance_breakdown(b, a, w).anchor_term));
    CHECK(geo_distance(a, b) >= 0.0);
  }
}

TEST_CASE("trajectory reward") {
  const ProblemSpec prob = problem_from(R"({"id":"one","plan":{"tasks":[{"function":"draw_point","args":{"points":[[0,0]]}}]}})");
  EnvConfig cfg;
  cfg.screenshots = ScreenshotMode::None;
  OraclePolicy oracle = OraclePolicy::for_problem(prob, cfg.viewport);
  const Trajectory t = run_policy(prob, oracle, cfg);
  const Scene ref = build_reference(*prob.plan, cfg.viewport).scene;
  const TrajectoryReward r = trajectory_reward(t, ref, kDefaults);
  CHECK(r.mean_step == doctest::Approx(1.0));
  CHECK(r.d_geo == doctest::Approx(0.0));
  CHECK(r.total == doctest::Approx(1.0 + kDefaults.lambda_g));

  // The same steps judged against a reference one world unit away.
  Scene shifted(cfg.viewport);
  add(shifted, Variant::Point, {Vec2{1, 0}});
  const TrajectoryReward s = trajectory_reward(t, shifted, kDefaults);
  CHECK(s.d_geo == doctest::Approx(kDefaults.sigma_g));
  CHECK(s.total == doctest::Approx(1.0 + kDefaults.lambda_g * std::exp(-1.0)));

  Trajectory empty = t;
  empty.steps.clear();
  try {
    trajectory_reward(empty, ref, kDefaults);
    FAIL("expected EMPTY_TRAJECTORY");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyTrajectory);
  }
}

TEST_CASE("wrong-type trajectory with a far scene approaches zero") {
  const ProblemSpec prob = problem_from(R"({"id":"one","plan":{"tasks":[{"function":"draw_point","args":{"points":[[0,0]]}}]}})");
  EnvConfig cfg;
  cfg.screenshots = ScreenshotMode::None;
  const std::vector<Action> junk(3, Action::type("input_bar", "nothing"));
  const Trajectory t = run_actions(prob, junk, cfg);
  Scene far(cfg.viewport);
  for (int i = 0; i < 40; ++i) add(far, Variant::Point, {Vec2{-4.0 + 0.2 * i, 4.0}});
  const TrajectoryReward r = trajectory_reward(t, far, kDefaults);
  CHECK(r.mean_step == 0.0);
  CHECK(r.d_geo > 0.0);
  CHECK(r.validity == doctest::Approx(kDefaults.lambda_g * std::exp(-r.d_geo / kDefaults.sigma_g)));
  // d_geo is bounded, so drive d_geo / sigma_g up through sigma_g.
  RewardParams sharp = kDefaults;
  sharp.sigma_g = 1e-3;
  CHECK(trajectory_reward(t, far, sharp).total < 1e-12);
}

}  // TEST_SUITE
