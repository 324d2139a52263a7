#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gcsim/error.hpp"
#include "gcsim/harness.hpp"
#include "gcsim/lower.hpp"
#include "gcsim/metrics.hpp"
#include "gcsim/perturbation.hpp"
#include "gcsim/plan.hpp"
#include "gcsim/policy.hpp"

namespace py = pybind11;
using namespace gcsim;
using nlohmann::json;

namespace {

// Everything structured crosses the boundary as JSON text; the Python side decodes it.
Viewport viewport_arg(const std::string& text) { return text.empty() ? Viewport{} : viewport_from_json(json::parse(text)); }

ProblemSpec problem_arg(const std::string& text) { return load_problem(text, "problem"); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the gcsim geometry-construction simulator";

  // Lives as long as the interpreter.
  static auto* error = new py::exception<Error>(m, "GcsimError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object cls = *error;
      py::object exc = cls(std::string(e.what()));
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(cls.ptr(), exc.ptr());
    }
  });

  m.def("project", [](double x, double y, const std::string& viewport) {
    const Vec2 p = project(viewport_arg(viewport), {x, y});
    return std::pair{p.x, p.y};
  }, py::arg("x"), py::arg("y"), py::arg("viewport") = "");
  m.def("unproject", [](double px, double py_, const std::string& viewport) {
    const Vec2 p = unproject(viewport_arg(viewport), {px, py_});
    return std::pair{p.x, p.y};
  }, py::arg("px"), py::arg("py"), py::arg("viewport") = "");

  m.def("validate", [](std::string plan_text) {
    // A whole problem file is accepted too.
    const json j = json::parse(plan_text, nullptr, false);
    if (j.is_object() && j.contains("plan")) plan_text = j["plan"].dump();
    const ParseResult r = parse_plan(plan_text);
    std::vector<std::tuple<std::string, int, std::string>> out;
    for (const Diagnostic& d : r.diagnostics) out.emplace_back(std::string(to_string(d.code)), d.task_index, d.message);
    for (const TaskPlan& plan : r.plans) {
      for (const Diagnostic& d : validate_dependencies(plan)) out.emplace_back(std::string(to_string(d.code)), d.task_index, d.message);
    }
    return out;
  }, py::arg("plan_text"));

  m.def("compile", [](const std::string& problem_text) {
    const ProblemSpec p = problem_arg(problem_text);
    return lower(*p.plan, ToolPalette::standard(), p.effective_viewport()).to_json().dump();
  }, py::arg("problem_text"));

  m.def("reference", [](const std::string& problem_text) {
    const ProblemSpec p = problem_arg(problem_text);
    return build_reference(*p.plan, p.effective_viewport()).scene.to_json().dump();
  }, py::arg("problem_text"));

  m.def("run", [](const std::string& problem_text, const std::string& policy, const std::string& output_dir, int step_budget) {
    const ProblemSpec p = problem_arg(problem_text);
    RunConfig cfg;
    cfg.env.viewport = p.effective_viewport();
    cfg.output_dir = output_dir;
    if (step_budget > 0) cfg.env.step_budget = step_budget;
    auto pol = make_policy(PolicySpec::parse(policy), p, cfg.env.viewport);
    py::gil_scoped_release release;
    return run_and_record(p, *pol, cfg).string();
  }, py::arg("problem_text"), py::arg("policy") = "oracle", py::arg("output_dir") = ".", py::arg("step_budget") = 0);

  m.def("replay", [](const std::string& path) {
    const ReplayReport r = replay_file(path);
    return std::tuple{r.ok, r.first_mismatch, r.problems};
  }, py::arg("path"));

  m.def("score", [](const std::string& path, const std::string& reference_path, const std::string& gt_path) {
    const Trajectory t = read_trajectory(path);
    Scene ref;
    if (!reference_path.empty()) {
      ref = Scene::from_json(json::parse(read_file(reference_path)));
    } else if (t.plan) {
      ref = build_reference(*t.plan, t.config.viewport).scene;
    } else {
      throw Error(ErrorCode::EmptyReference, "no reference scene and no plan in the trajectory");
    }
    std::optional<GroundTruth> gt;
    if (!gt_path.empty()) gt = GroundTruth::from_trajectory(read_trajectory(gt_path));
    return score_trajectory(t, ref, gt, RewardParams{}, nullptr).to_json().dump();
  }, py::arg("path"), py::arg("reference_path") = "", py::arg("gt_path") = "");

  m.def("middle_process_score", &middle_process_score, py::arg("tsr"), py::arg("ssr"), py::arg("pa"), py::arg("aa"));
  m.def("final_result_score", &final_result_score, py::arg("otc"), py::arg("tc"), py::arg("vs"), py::arg("gl"));
  m.def("overall_score", &overall_score, py::arg("mps"), py::arg("frs"));

  m.def("sensitivity", [](const std::string& problem_text, int task, double h) {
    const ProblemSpec p = problem_arg(problem_text);
    return finite_diff_sensitivity(*p.plan, task, p.effective_viewport(), h).to_json().dump();
  }, py::arg("problem_text"), py::arg("task"), py::arg("h") = kDefaultFiniteDifferenceStep);

  m.def("cascade", [](const std::string& problem_text, double sigma_px, int seeds, std::uint64_t seed) {
    const ProblemSpec p = problem_arg(problem_text);
    py::gil_scoped_release release;
    return cascade_report(*p.plan, sigma_px, seeds, seed, p.effective_viewport()).to_json().dump();
  }, py::arg("problem_text"), py::arg("sigma_px"), py::arg("seeds") = 100, py::arg("seed") = 1);
}
