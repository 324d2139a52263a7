#include <doctest.h>

#include <cmath>
#include <random>

#include "gcsim/environment.hpp"
#include "gcsim/error.hpp"
#include "gcsim/lower.hpp"
#include "gcsim/metrics.hpp"
#include "support.hpp"

using namespace gcsim;
using namespace gcsim::testing;

namespace {

ObjectId add(Scene& s, Variant v, std::vector<Input> in, PointKind kind = PointKind::Free) {
  ObjectSpec spec;
  spec.variant = v;
  spec.point_kind = kind;
  spec.inputs = std::move(in);
  return s.add_object(spec);
}

GroundTruth three_paints() {
  GroundTruth gt;
  gt.actions = {Action::paint("point", {0.25, 0.25}), Action::paint("point", {0.5, 0.5}), Action::paint("point", {0.75, 0.75})};
  gt.task_of_step = {0, 0, 0};
  return gt;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("paint tolerance boundary") {
  for (double x : {0.25, 0.5, 0.75}) {
    const Action gt = Action::paint("point", {x, 0.5});
    CHECK(parameter_correct(Action::paint("point", {x + 5.0 / 1280, 0.5}), gt));
    CHECK(parameter_correct(Action::paint("point", {x - 5.0 / 1280, 0.5}), gt));
    CHECK_FALSE(parameter_correct(Action::paint("point", {x + (5.0 + 1e-6) / 1280, 0.5}), gt));
  }
  for (double y : {0.2, 0.5, 0.8}) {
    const Action gt = Action::paint("point", {0.5, y});
    CHECK(parameter_correct(Action::paint("point", {0.5, y + 5.0 / 720}), gt));
    CHECK_FALSE(parameter_correct(Action::paint("point", {0.5, y - (5.0 + 1e-6) / 720}), gt));
  }
  CHECK_FALSE(parameter_correct(Action::paint("point", {0.5, 0.5 + 6.0 / 720}), Action::paint("point", {0.5, 0.5})));
}

TEST_CASE("type and click parameters") {
  CHECK(parameter_correct(Action::type("input_bar", "AB=2"), Action::type("input_bar", "ab=2")));
  CHECK_FALSE(parameter_correct(Action::type("input_bar", "AB=3"), Action::type("input_bar", "ab=2")));
  const BBox box{10, 10, 50, 30};
  const Action gt = Action::click("tool:point", box.center(), box);
  CHECK(parameter_correct(Action::click("tool:point", {50, 30}), gt));
  CHECK_FALSE(parameter_correct(Action::click("tool:point", {50.001, 30}), gt));
  CHECK_FALSE(parameter_correct(Action::paint("point", {0.5, 0.5}), gt));
  try {
    parameter_correct(Action::click("tool:point", {1, 1}), Action::click("tool:point", {1, 1}));
    FAIL("expected MISSING_ANNOTATION");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingAnnotation);
  }
}

TEST_CASE("score combinations") {
  CHECK(middle_process_score(0.0, 0.5, 0.6, 0.8) == doctest::Approx(0.24).epsilon(1e-12));
  CHECK(final_result_score(1, 1, 1, 1) == doctest::Approx(1.0));
  CHECK(final_result_score(0.5, 0.5, 0.5, 0.5) == doctest::Approx(0.5));
  CHECK(final_result_score(0.4472, 0.6, 0.3, 0.7) == doctest::Approx(0.51416).epsilon(1e-12));
  CHECK(overall_score(0.24, 0.51416) == doctest::Approx(0.37708).epsilon(1e-12));
  CHECK(overall_score(1, 1) == 1.0);
  CHECK(overall_score(0.3, 0.3) == doctest::Approx(0.3));
  try {
    final_result_score(1.2, 0, 0, 0);
    FAIL("expected OUT_OF_RANGE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfRange);
  }
  CHECK_THROWS_AS(overall_score(-0.1, 0.5), Error);
}

TEST_CASE("middle metrics") {
  const GroundTruth gt = three_paints();
  const MiddleMetrics exact = middle_metrics(gt.actions, gt);
  CHECK(exact.aa == 1.0);
  CHECK(exact.pa == 1.0);
  CHECK(exact.ssr == 1.0);
  CHECK(exact.tsr == 1.0);
  CHECK(exact.mps == 1.0);

  std::vector<Action> pred = gt.actions;
  pred[1].point.y += 6.0 / 720;
  const MiddleMetrics one_off = middle_metrics(pred, gt);
  CHECK(one_off.aa == 1.0);
  CHECK(one_off.ssr == doctest::Approx(2.0 / 3.0));
  CHECK(one_off.tsr == 0.0);

  const std::vector<Action> shorter(gt.actions.begin(), gt.actions.begin() + 1);
  const MiddleMetrics missing = middle_metrics(shorter, gt);
  CHECK(missing.aa == doctest::Approx(1.0 / 3.0));
  CHECK(missing.pa == doctest::Approx(1.0 / 3.0));

  const GroundTruth none;
  try {
    middle_metrics(pred, none);
    FAIL("expected EMPTY_REFERENCE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyReference);
  }
}

TEST_CASE("metrics average per task first") {
  GroundTruth gt;
  gt.actions = {Action::paint("point", {0.1, 0.1}), Action::paint("point", {0.2, 0.2}), Action::paint("point", {0.3, 0.3}),
                Action::paint("point", {0.4, 0.4})};
  gt.task_of_step = {0, 0, 0, 1};
  std::vector<Action> pred = gt.actions;
  pred[3].point.x += 0.5;
  const MiddleMetrics m = middle_metrics(pred, gt);
  // Task 0 is perfect, task 1 has PA 0: mean over tasks is 0.5, not 3/4.
  CHECK(m.pa == doctest::Approx(0.5));
  CHECK(m.tsr == doctest::Approx(0.5));
  REQUIRE(m.tasks.size() == 2);
}

TEST_CASE("ordering invariants on random predictions") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> noise(0, 4.0 / 1280);
  const ProblemSpec prob = load_corpus_problem(corpus_dir() / "incenter_construction.json");
  const GroundTruth gt = GroundTruth::from_plan(*prob.plan, Viewport{});
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Action> pred;
    for (const Action& a : gt.actions) {
      if (u(rng) < 0.1) continue;
      Action p = a;
      if (p.kind == ActionKind::Paint) p.point = p.point + Vec2{noise(rng), noise(rng)};
      if (p.kind == ActionKind::Click && u(rng) < 0.2) p.point = {1000, 700};
      if (u(rng) < 0.05) p.kind = ActionKind::Type;
      pred.push_back(p);
    }
    const MiddleMetrics m = middle_metrics(pred, gt);
    for (const TaskMetrics& t : m.tasks) {
      CHECK(t.ssr <= std::min(t.aa, t.pa) + 1e-15);
      CHECK(double(t.success) <= t.ssr + 1e-15);
    }
    CHECK(m.tsr <= m.ssr + 1e-15);
    for (double v : {m.aa, m.pa, m.ssr, m.tsr, m.mps}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("objective task completion") {
  const Viewport v;
  Scene star(v);
  const ObjectId a = add(star, Variant::Point, {Vec2{0, 0}});
  const ObjectId b = add(star, Variant::Point, {Vec2{2, 0}});
  add(star, Variant::Segment, {a, b});
  const OtcScore same = otc_score(star, star);
  CHECK(same.s_point == 1.0);
  CHECK(same.s_cmd == 1.0);
  CHECK(same.otc == 1.0);

  const double unit = v.half_diagonal();
  Scene one(v), near(v), far(v);
  add(one, Variant::Point, {Vec2{0, 0}});
  add(near, Variant::Point, {Vec2{0.2 * unit, 0}});
  add(far, Variant::Point, {Vec2{0, 0.6 * unit}});
  CHECK(otc_score(near, one).s_point == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(otc_score(near, one).s_point == doctest::Approx(0.36788).epsilon(1e-5));
  CHECK(otc_score(far, one).s_point == 0.0);

  // Two predicted points near one target count once.
  Scene twice(v);
  add(twice, Variant::Point, {Vec2{0, 0}});
  add(twice, Variant::Point, {Vec2{0.01, 0}});
  CHECK(otc_score(twice, one).s_point <= 1.0);

  // The segment command survives relabelling through the point map.
  Scene rebuilt(v);
  const ObjectId q = add(rebuilt, Variant::Point, {Vec2{2, 0}});
  const ObjectId p = add(rebuilt, Variant::Point, {Vec2{0, 0}});
  add(rebuilt, Variant::Segment, {p, q});
  CHECK(otc_score(rebuilt, star).s_cmd == 1.0);

  Scene empty(v);
  CHECK_THROWS_AS(otc_score(star, empty), Error);
  CHECK(otc_score(empty, star).otc == 0.0);
}

TEST_CASE("judge") {
  const ProblemSpec prob = load_corpus_problem(corpus_dir() / "perpendicular_through_point.json");
  const Scene star = build_reference(*prob.plan, Viewport{}).scene;
  const JudgeScores same = fallback_judge(star, star);
  CHECK(same.tc == 1.0);
  CHECK(same.vs == 1.0);
  CHECK(same.gl == 1.0);
  CHECK(same.provider == "rule-based-fallback");

  const Scene blank(Viewport{});
  const JudgeScores b = fallback_judge(blank, star);
  CHECK(b.tc == 0.0);
  CHECK(b.gl == 0.0);
  CHECK(b.vs < 1.0);

  const JudgeFile file(nlohmann::json{{"p1", {{"TC", 0.6}, {"VS", 0.3}, {"GL", 0.7}}}, {"p2", {{"tc", 1.5}, {"vs", -1}, {"gl", 0.2}}}});
  const JudgeScores ext = judge("p1", blank, star, &file);
  CHECK(ext.tc == 0.6);
  CHECK(ext.vs == 0.3);
  CHECK(ext.gl == 0.7);
  CHECK(ext.provider == "external");
  const JudgeScores clamped = judge("p2", blank, star, &file);
  CHECK(clamped.tc == 1.0);
  CHECK(clamped.vs == 0.0);
  CHECK(judge("unknown", star, star, &file).provider == "rule-based-fallback");
  try {
    JudgeFile::load("/nonexistent/judge.json");
    FAIL("expected PROVIDER_UNAVAILABLE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ProviderUnavailable);
  }
}

TEST_CASE("score report and aggregation") {
  const ProblemSpec prob = load_corpus_problem(corpus_dir() / "square_with_diagonals.json");
  const Viewport v;
  const GroundTruth gt = GroundTruth::from_plan(*prob.plan, v);
  const Scene star = build_reference(*prob.plan, v).scene;
  const ScoreReport full = score(prob.id, gt.actions, gt, star, star);
  CHECK(full.mps == 1.0);
  CHECK(full.os == 1.0);
  CHECK(full.mps == doctest::Approx(0.6 * full.tsr + 0.2 * full.ssr + 0.1 * full.pa + 0.1 * full.aa));
  CHECK(full.os == doctest::Approx((full.mps + full.frs) / 2));
  const auto j = full.to_json();
  for (const char* k : {"AA", "PA", "SSR", "TSR", "MPS", "OTC", "TC", "VS", "GL", "FRS", "OS", "per_task", "steps", "s_point", "s_cmd"}) CHECK(j.contains(k));
  CHECK(full.table().find("MPS") != std::string::npos);

  const std::vector<Action> half(gt.actions.begin(), gt.actions.begin() + static_cast<std::ptrdiff_t>(gt.actions.size() / 2));
  const ScoreReport part = score(prob.id, half, gt, Scene(v), star);
  const ScoreReport both[] = {full, part};
  const ScoreReport agg = aggregate(both);
  CHECK(agg.problems == 2);
  CHECK(agg.aa == doctest::Approx((full.aa + part.aa) / 2));
  CHECK(agg.mps == doctest::Approx(middle_process_score(agg.tsr, agg.ssr, agg.pa, agg.aa)));
  CHECK(agg.os == doctest::Approx(overall_score(agg.mps, agg.frs)));
}

}  // TEST_SUITE
