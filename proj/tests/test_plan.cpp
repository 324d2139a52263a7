#include <doctest.h>

#include <cmath>
#include <set>

#include "gcsim/environment.hpp"
#include "gcsim/error.hpp"
#include "gcsim/lower.hpp"
#include "gcsim/palette.hpp"
#include "gcsim/plan.hpp"
#include "support.hpp"

using namespace gcsim;
using namespace gcsim::testing;

namespace {

std::vector<DiagCode> codes(const TaskPlan& plan) {
  std::vector<DiagCode> out;
  for (const Diagnostic& d : validate_dependencies(plan)) out.push_back(d.code);
  return out;
}

ParseResult parse_tasks(std::string_view tasks) {
  return parse_plan(std::string(R"({"description":"t","grade_level":"Grade 8","drawing_difficulty":"Beginner","skills":[],"tasks":)") +
                    std::string(tasks) + "}");
}

}  // namespace

TEST_SUITE("plan") {

TEST_CASE("example plans parse") {
  const ParseResult one = parse_plan(kExampleSquare);
  REQUIRE(one.ok());
  CHECK(one.plans[0].tasks.size() == 1);
  CHECK(one.plans[0].drawing_difficulty == Difficulty::Beginner);
  const ParseResult two = parse_plan(kExampleBisector);
  REQUIRE(two.ok());
  CHECK(two.plans[0].tasks.size() == 3);
  CHECK(two.plans[0].tasks[2].text == "L1");
  CHECK(validate_dependencies(two.plans[0]).empty());
}

TEST_CASE("unknown function") {
  for (const char* name : {"draw_blob", R"(draw\_blob)"}) {
    const ParseResult r = parse_tasks(std::string(R"([{"function":")") + name + R"(","args":{}}])");
    REQUIRE_FALSE(r.ok());
    CHECK(r.diagnostics[0].code == DiagCode::UnknownFunction);
  }
}

TEST_CASE("lossless repairs are applied and reported") {
  const ParseResult r = parse_plan(R"({"description":"t","drawing_difficulty":"beginner","tasks":[
    {"function":"Draw\_Segment ","args":{"points":[["0","0"],{"x":2,"y":"1"}],},},
  ],})");
  REQUIRE(r.ok());
  CHECK_FALSE(r.warnings.empty());
  const Task& t = r.plans[0].tasks[0];
  CHECK(t.function == Function::DrawSegment);
  CHECK(t.points[1] == Vec2{2, 1});
}

TEST_CASE("semantic guesses are refused") {
  const ParseResult r = parse_tasks(R"([{"function":"draw_segment","args":{"points":[[0,0]]}}])");
  REQUIRE_FALSE(r.ok());
  CHECK(r.diagnostics[0].code == DiagCode::MalformedTask);
  CHECK_FALSE(parse_tasks(R"([{"function":"add_text_label","args":{"position":[0,0],"text":""}}])").ok());
}

TEST_CASE("floating reference") {
  const TaskPlan plan = plan_from(R"([
    {"function":"draw_segment","args":{"points":[[-1,0],[1,0]]}},
    {"function":"draw_point","args":{"points":[[0,2]]}},
    {"function":"perpendicular_line","args":{"points":[[0.5,0.37],[0,2]]}}])");
  const auto c = codes(plan);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == DiagCode::FloatingRef);
}

TEST_CASE("near-miss on a circle") {
  // |(0.709, 0.709)| - 1 is about 2.7e-3: close to the circle, not on it.
  CHECK(std::hypot(0.709, 0.709) - 1.0 == doctest::Approx(2.67e-3).epsilon(0.01));
  const TaskPlan plan = plan_from(R"([
    {"function":"draw_circle_center_point","args":{"points":[[0,0],[1,0]]}},
    {"function":"draw_point","args":{"points":[[3,0]]}},
    {"function":"tangents","args":{"points":[[3,0],[0.709,0.709]]}}])");
  const auto c = codes(plan);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == DiagCode::OffObject);
}

TEST_CASE("use before create") {
  const TaskPlan plan = plan_from(R"([
    {"function":"angle_bisector","args":{"points":[[3,0],[-1,0],[1,3]]}},
    {"function":"draw_polygon","args":{"points":[[-1,0],[3,0],[1,3]]}}])");
  const auto c = codes(plan);
  REQUIRE_FALSE(c.empty());
  for (DiagCode d : c) CHECK(d == DiagCode::UseBeforeCreate);
  // Loading a rejected plan fails as a whole.
  try {
    problem_from(R"({"id":"x","plan":{"tasks":[
      {"function":"angle_bisector","args":{"points":[[3,0],[-1,0],[1,3]]}},
      {"function":"draw_polygon","args":{"points":[[-1,0],[3,0],[1,3]]}}]}})");
    FAIL("expected E_USE_BEFORE_CREATE");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UseBeforeCreate);
  }

  // Inputs produced only by later free points.
  const auto late = codes(plan_from(R"([
    {"function":"perpendicular_bisector","args":{"points":[[1,2],[-2,0.5]]}},
    {"function":"draw_point","args":{"points":[[1,2]]}},
    {"function":"draw_point","args":{"points":[[-2,0.5]]}}])"));
  REQUIRE(late.size() == 2);
  for (DiagCode d : late) CHECK(d == DiagCode::UseBeforeCreate);
}

TEST_CASE("free points near an object are not diagnosed") {
  const TaskPlan plan = plan_from(R"([
    {"function":"draw_segment","args":{"points":[[-2,0],[2,0]]}},
    {"function":"draw_point","args":{"points":[[0.5,0.01]]}}])");
  CHECK(codes(plan).empty());
}

TEST_CASE("lowering: point tool sequence and elision") {
  const Viewport v;
  const ToolPalette pal = ToolPalette::standard();
  const LoweredProgram one = lower(plan_from(R"([{"function":"draw_point","args":{"points":[[0,0]]}}])"), pal, v);
  REQUIRE(one.action_count() == 3);
  const auto a = one.flatten();
  CHECK(a[0].kind == ActionKind::Click);
  CHECK(a[0].object_type == "category:points");
  CHECK(a[1].kind == ActionKind::Click);
  CHECK(a[1].object_type == "tool:point");
  CHECK(a[2].kind == ActionKind::Paint);
  CHECK(distance(a[2].point, {0.5, 0.5}) < 1e-15);

  const LoweredProgram two = lower(plan_from(R"([
    {"function":"draw_point","args":{"points":[[0,0]]}},
    {"function":"draw_point","args":{"points":[[1,1]]}}])"), pal, v);
  REQUIRE(two.groups.size() == 2);
  CHECK(two.groups[1].actions.size() == 1);
  CHECK(two.groups[1].actions[0].kind == ActionKind::Paint);
}

TEST_CASE("lowering: text label") {
  const LoweredProgram p = lower(plan_from(R"([{"function":"add_text_label","args":{"position":[0.5,1],"text":"L1"}}])"),
                                 ToolPalette::standard(), Viewport{});
  const auto a = p.flatten();
  REQUIRE(a.size() == 4);
  CHECK(a[0].kind == ActionKind::Click);
  CHECK(a[1].kind == ActionKind::Click);
  CHECK(a[2].kind == ActionKind::Paint);
  CHECK(a[3].kind == ActionKind::Type);
  CHECK(a[3].text == "L1");
}

TEST_CASE("lowering invariants over the corpus") {
  const ToolPalette pal = ToolPalette::standard();
  for (const auto& f : corpus_files()) {
    CAPTURE(f.filename().string());
    const ProblemSpec prob = load_corpus_problem(f);
    const Viewport v = prob.effective_viewport();
    const LoweredProgram p = lower(*prob.plan, pal, v);
    const LoweredProgram again = lower(*prob.plan, pal, v);
    CHECK(p.to_json().dump() == again.to_json().dump());
    std::size_t total = 0;
    for (const ActionGroup& g : p.groups) {
      CHECK_FALSE(g.actions.empty());
      total += g.actions.size();
    }
    const auto flat = p.flatten();
    CHECK(total == flat.size());
    CHECK(p.task_of_step().size() == flat.size());
    for (const Action& a : flat) {
      if (a.kind != ActionKind::Click) continue;
      REQUIRE(a.target.has_value());
      CHECK(distance(a.point, a.target->center()) == 0.0);
    }
    CHECK(LoweredProgram::from_json(p.to_json()).to_json() == p.to_json());
  }
}

TEST_CASE("replay closure: executing the lowering rebuilds the reference") {
  EnvConfig cfg;
  cfg.screenshots = ScreenshotMode::None;
  for (const auto& f : corpus_files()) {
    CAPTURE(f.filename().string());
    const ProblemSpec prob = load_corpus_problem(f);
    const Viewport v = prob.effective_viewport();
    cfg.viewport = v;
    const auto actions = lower(*prob.plan, ToolPalette::standard(), v).flatten();
    const Trajectory t = run_actions(prob, actions, cfg);
    for (const StepRecord& r : t.steps) CHECK(r.exe_success);
    const Scene ref = build_reference(*prob.plan, v).scene;
    REQUIRE(t.final_scene.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const GeoObject& a = t.final_scene.objects()[i];
      const GeoObject& b = ref.objects()[i];
      CHECK(a.variant == b.variant);
      CHECK(a.label == b.label);
      CHECK(a.text == b.text);
      REQUIRE(a.coords.size() == b.coords.size());
      for (std::size_t k = 0; k < a.coords.size(); ++k) CHECK(distance(a.coords[k], b.coords[k]) <= kEpsGeo);
    }
  }
}

TEST_CASE("shipped reference scenes are current") {
  for (const auto& f : corpus_files()) {
    CAPTURE(f.filename().string());
    const ProblemSpec prob = load_corpus_problem(f);
    const auto ref_path = corpus_dir() / "references" / f.filename();
    REQUIRE(std::filesystem::exists(ref_path));
    const Scene shipped = Scene::from_json(nlohmann::json::parse(slurp(ref_path)));
    CHECK(shipped.hash() == build_reference(*prob.plan, prob.effective_viewport()).scene.hash());
  }
}

TEST_CASE("corpus covers every function and difficulty") {
  std::set<Function> fns;
  std::set<Difficulty> diffs;
  for (const auto& f : corpus_files()) {
    const ProblemSpec prob = load_corpus_problem(f);
    for (const Task& t : prob.plan->tasks) fns.insert(t.function);
    if (prob.plan->drawing_difficulty) diffs.insert(*prob.plan->drawing_difficulty);
  }
  CHECK(fns.size() == 18);
  CHECK(diffs.size() == 3);
}

}  // TEST_SUITE
