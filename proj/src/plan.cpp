#include "gcsim/plan.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "gcsim/error.hpp"

namespace gcsim {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::ranges::transform(s, s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Lossless text-level fixes applied before JSON decoding.
std::string repair_text(std::string_view raw, std::vector<std::string>& warnings) {
  std::string out;
  out.reserve(raw.size());
  bool in_string = false;
  bool fixed_escape = false;
  bool fixed_comma = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (c == '\\' && i + 1 < raw.size()) {
        if (raw[i + 1] == '_') {
          out.push_back('_');
          fixed_escape = true;
        } else {
          out.push_back(c);
          out.push_back(raw[i + 1]);
        }
        ++i;
        continue;
      }
      if (c == '"') in_string = false;
      out.push_back(c);
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < raw.size() && std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      if (j < raw.size() && (raw[j] == ']' || raw[j] == '}')) {
        fixed_comma = true;
        continue;
      }
    }
    out.push_back(c);
  }
  if (fixed_escape) warnings.emplace_back("repaired escaped underscores in string literals");
  if (fixed_comma) warnings.emplace_back("removed trailing commas");
  return out;
}

std::optional<double> as_number(const json& v, bool& repaired) {
  if (v.is_number()) {
    const double d = v.get<double>();
    return std::isfinite(d) ? std::optional(d) : std::nullopt;
  }
  if (v.is_string()) {
    const std::string s = trim(v.get<std::string>());
    double d = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty() && std::isfinite(d)) {
      repaired = true;
      return d;
    }
  }
  return std::nullopt;
}

std::optional<Vec2> as_point(const json& v, bool& repaired) {
  if (v.is_array() && v.size() == 2) {
    const auto x = as_number(v[0], repaired);
    const auto y = as_number(v[1], repaired);
    if (x && y) return Vec2{*x, *y};
  } else if (v.is_object() && v.size() == 2 && v.contains("x") && v.contains("y")) {
    const auto x = as_number(v["x"], repaired);
    const auto y = as_number(v["y"], repaired);
    if (x && y) {
      repaired = true;
      return Vec2{*x, *y};
    }
  }
  return std::nullopt;
}

struct TaskParse {
  std::optional<Task> task;
  std::optional<Diagnostic> diag;
};

TaskParse parse_task(const json& jt, int index, std::vector<std::string>& warnings) {
  const auto fail = [&](DiagCode code, std::string msg) {
    return TaskParse{std::nullopt, Diagnostic{code, index, std::move(msg)}};
  };
  const std::string where = "task " + std::to_string(index) + ": ";
  if (!jt.is_object()) return fail(DiagCode::MalformedTask, where + "task entry is not an object");
  if (!jt.contains("function") || !jt["function"].is_string()) {
    return fail(DiagCode::MalformedTask, where + "missing function name");
  }
  const std::string raw_name = jt["function"].get<std::string>();
  const std::string name = lower(trim(raw_name));
  const auto fn = function_from_name(name);
  if (!fn) return fail(DiagCode::UnknownFunction, where + "'" + raw_name + "' is not in the function library");
  if (name != raw_name) warnings.push_back(where + "normalized function name '" + raw_name + "'");
  const FunctionInfo& fi = info(*fn);

  const json args = jt.contains("args") ? jt["args"] : json::object();
  if (!args.is_object()) return fail(DiagCode::MalformedTask, where + "args must be an object");

  Task task;
  task.function = *fn;
  bool repaired = false;
  for (const auto& [key, value] : args.items()) {
    const bool known = (key == "points" && fi.arity != 0 && *fn != Function::AddTextLabel) ||
                       (key == "position" && *fn == Function::AddTextLabel) || (key == "text" && fi.takes_text);
    if (!known) warnings.push_back(where + "ignored unknown argument '" + key + "'");
  }

  if (fi.takes_text) {
    if (!args.contains("text") || !args["text"].is_string()) {
      return fail(DiagCode::MalformedTask, where + "missing string argument 'text'");
    }
    task.text = trim(args["text"].get<std::string>());
    if (task.text.empty()) return fail(DiagCode::MalformedTask, where + "text is empty");
  }

  if (*fn == Function::AddTextLabel) {
    if (!args.contains("position")) return fail(DiagCode::MalformedTask, where + "missing 'position'");
    const auto p = as_point(args["position"], repaired);
    if (!p) return fail(DiagCode::MalformedTask, where + "position must be [x, y]");
    task.points = {*p};
  } else if (fi.arity != 0) {
    if (!args.contains("points") || !args["points"].is_array()) {
      return fail(DiagCode::MalformedTask, where + "missing 'points' list");
    }
    json pts = args["points"];
    if (*fn == Function::DrawPoint && pts.size() == 2 && !pts[0].is_array() && !pts[0].is_object()) {
      pts = json::array({pts});
      warnings.push_back(where + "wrapped a bare coordinate pair into a point list");
    }
    for (const json& jp : pts) {
      const auto p = as_point(jp, repaired);
      if (!p) return fail(DiagCode::MalformedTask, where + "point entry is not a numeric pair: " + jp.dump());
      task.points.push_back(*p);
    }
    const auto n = static_cast<int>(task.points.size());
    const bool count_ok = fi.max_points == 0 ? n >= fi.min_points : n == fi.min_points;
    if (!count_ok) {
      return fail(DiagCode::MalformedTask, where + std::string(fi.name) + " takes " +
                                               (fi.max_points == 0 ? "at least " : "exactly ") +
                                               std::to_string(fi.min_points) + " points, got " + std::to_string(n));
    }
  }
  if (repaired) warnings.push_back(where + "normalized numeric strings / point objects to number pairs");
  return TaskParse{std::move(task), std::nullopt};
}

void parse_one_plan(const json& jp, int plan_index, ParseResult& out) {
  const auto plan_diag = [&](DiagCode code, std::string msg) {
    out.diagnostics.push_back(Diagnostic{code, -1, std::move(msg), plan_index});
  };
  if (!jp.is_object()) {
    plan_diag(DiagCode::MalformedTask, "plan entry is not an object");
    return;
  }
  TaskPlan plan;
  if (jp.contains("description") && jp["description"].is_string()) plan.description = trim(jp["description"].get<std::string>());
  if (jp.contains("grade_level") && jp["grade_level"].is_string()) plan.grade_level = trim(jp["grade_level"].get<std::string>());
  if (jp.contains("drawing_difficulty") && jp["drawing_difficulty"].is_string()) {
    const std::string d = lower(trim(jp["drawing_difficulty"].get<std::string>()));
    if (d == "beginner") {
      plan.drawing_difficulty = Difficulty::Beginner;
    } else if (d == "intermediate") {
      plan.drawing_difficulty = Difficulty::Intermediate;
    } else if (d == "advanced") {
      plan.drawing_difficulty = Difficulty::Advanced;
    } else {
      out.warnings.push_back("unrecognized drawing_difficulty '" + jp["drawing_difficulty"].get<std::string>() + "' dropped");
    }
  }
  if (jp.contains("skills") && jp["skills"].is_array()) {
    for (const json& s : jp["skills"]) {
      if (s.is_string()) plan.skills.push_back(trim(s.get<std::string>()));
    }
  }
  if (!jp.contains("tasks") || !jp["tasks"].is_array()) {
    plan_diag(DiagCode::MalformedTask, "plan has no 'tasks' list");
    return;
  }
  const std::size_t before = out.diagnostics.size();
  int index = 0;
  for (const json& jt : jp["tasks"]) {
    TaskParse tp = parse_task(jt, index, out.warnings);
    if (tp.diag) {
      tp.diag->plan_index = plan_index;
      out.diagnostics.push_back(*tp.diag);
    } else {
      plan.tasks.push_back(std::move(*tp.task));
    }
    ++index;
  }
  if (out.diagnostics.size() == before) out.plans.push_back(std::move(plan));
}

Viewport validation_viewport() {
  // One pixel per world unit, so pixel snapping radii read as world distances.
  return Viewport{-1.0, 1.0, -1.0, 1.0, 2, 2};
}

}  // namespace

std::string_view to_string(DiagCode c) {
  switch (c) {
    case DiagCode::FloatingRef: return "E_FLOATING_REF";
    case DiagCode::UseBeforeCreate: return "E_USE_BEFORE_CREATE";
    case DiagCode::OffObject: return "E_OFF_OBJECT";
    case DiagCode::MalformedTask: return "E_MALFORMED_TASK";
    case DiagCode::UnknownFunction: return "E_UNKNOWN_FUNCTION";
  }
  return "E_UNKNOWN";
}

json Task::args() const {
  const FunctionInfo& fi = info(function);
  json a = json::object();
  if (function == Function::AddTextLabel) {
    a["position"] = json::array({points.at(0).x, points.at(0).y});
  } else if (fi.arity != 0) {
    json pts = json::array();
    for (Vec2 p : points) pts.push_back(json::array({p.x, p.y}));
    a["points"] = std::move(pts);
  }
  if (fi.takes_text) a["text"] = text;
  return a;
}

std::string Task::describe() const { return std::string(info(function).name) + " " + args().dump(); }

std::vector<Vec2> Task::paint_targets() const {
  std::vector<Vec2> t = points;
  if (function == Function::DrawPolygon && !points.empty()) t.push_back(points.front());
  return t;
}

json TaskPlan::to_json() const {
  json tasks_json = json::array();
  for (const Task& t : tasks) tasks_json.push_back(json{{"function", info(t.function).name}, {"args", t.args()}});
  json j{{"description", description}, {"grade_level", grade_level}, {"skills", skills}, {"tasks", std::move(tasks_json)}};
  if (drawing_difficulty) {
    static constexpr std::string_view kNames[] = {"beginner", "intermediate", "advanced"};
    j["drawing_difficulty"] = kNames[static_cast<int>(*drawing_difficulty)];
  }
  return j;
}

ParseResult parse_plan_json(const json& j) {
  ParseResult out;
  if (j.is_array()) {
    int i = 0;
    for (const json& jp : j) parse_one_plan(jp, i++, out);
    if (j.empty()) out.diagnostics.push_back(Diagnostic{DiagCode::MalformedTask, -1, "empty plan array"});
  } else {
    parse_one_plan(j, 0, out);
  }
  return out;
}

ParseResult parse_plan(std::string_view raw) {
  std::vector<std::string> warnings;
  const std::string text = repair_text(raw, warnings);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    ParseResult out;
    out.warnings = std::move(warnings);
    out.diagnostics.push_back(Diagnostic{DiagCode::MalformedTask, -1, std::string("unparseable plan text: ") + e.what()});
    return out;
  }
  ParseResult out = parse_plan_json(j);
  out.warnings.insert(out.warnings.begin(), warnings.begin(), warnings.end());
  return out;
}

ReferenceConstruction build_reference(const TaskPlan& plan, const Viewport& viewport, const BuildOptions& options) {
  ReferenceConstruction ref{Scene(viewport), {}};
  ref.tasks.reserve(plan.tasks.size());
  for (std::size_t i = 0; i < plan.tasks.size(); ++i) {
    const Task& task = plan.tasks[i];
    std::vector<Vec2> pts = task.points;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto it = options.overrides.find({static_cast<int>(i), static_cast<int>(k)});
      if (it != options.overrides.end()) pts[k] = it->second;
    }
    TaskTrace trace;
    const auto commit = [&](std::span<const Vec2> p) {
      CommitResult r = commit_function(ref.scene, task.function, p, task.text, options.snap_px);
      trace.created.insert(trace.created.end(), r.created.begin(), r.created.end());
      trace.reused.insert(trace.reused.end(), r.reused.begin(), r.reused.end());
    };
    try {
      if (task.function == Function::DrawPoint) {
        for (const Vec2& p : pts) commit(std::span(&p, 1));
      } else {
        commit(pts);
      }
    } catch (const Error& e) {
      if (!options.lenient) throw Error(e.code(), "task " + std::to_string(i) + " (" + task.describe() + "): " + e.what());
      trace.error = e.what();
    }
    ref.tasks.push_back(std::move(trace));
  }
  return ref;
}

std::vector<Diagnostic> validate_dependencies(const TaskPlan& plan, double eps) {
  std::vector<Diagnostic> diags;
  const auto any_host = [](const GeoObject& o) {
    return !o.is_point() && o.variant != Variant::TextLabel && o.variant != Variant::Expression;
  };
  const auto resolvable = [&](const Scene& s, Vec2 p) {
    for (const GeoObject& o : s.objects()) {
      if (o.is_point() ? distance(o.position(), p) <= eps : (any_host(o) && point_on_object(o, p, eps))) return true;
    }
    return false;
  };

  // Whole-plan build. A construction whose inputs are missing is skipped, so it
  // cannot materialize them and hide the later task that really creates them.
  ReferenceConstruction full{Scene(validation_viewport()), {}};
  for (const Task& task : plan.tasks) {
    TaskTrace trace;
    const bool ready = !info(task.function).requires_existing ||
                       std::all_of(task.points.begin(), task.points.end(), [&](Vec2 p) { return resolvable(full.scene, p); });
    if (ready) {
      try {
        const std::size_t n = task.function == Function::DrawPoint ? 1 : task.points.size();
        for (std::size_t i = 0; i < task.points.size(); i += n) {
          CommitResult r = commit_function(full.scene, task.function, std::span(task.points).subspan(i, n), task.text, eps);
          trace.created.insert(trace.created.end(), r.created.begin(), r.created.end());
        }
        if (task.points.empty()) {
          CommitResult r = commit_function(full.scene, task.function, {}, task.text, eps);
          trace.created.insert(trace.created.end(), r.created.begin(), r.created.end());
        }
      } catch (const Error&) {
      }
    }
    full.tasks.push_back(std::move(trace));
  }
  Scene prefix(validation_viewport());

  // Which task created each object of the full build.
  std::vector<int> creator(full.scene.size(), -1);
  for (std::size_t t = 0; t < full.tasks.size(); ++t) {
    for (ObjectId id : full.tasks[t].created) creator[static_cast<std::size_t>(id)] = static_cast<int>(t);
  }
  const auto created_later = [&](int task, Vec2 p, auto accept) {
    for (const GeoObject& o : full.scene.objects()) {
      if (creator[static_cast<std::size_t>(o.id)] <= task || !accept(o)) continue;
      if (o.is_point() ? distance(o.position(), p) <= eps : point_on_object(o, p, eps)) return true;
    }
    return false;
  };
  const auto near_host = [&](Vec2 p, auto accept) {
    for (const GeoObject& o : prefix.objects()) {
      if (!o.is_point() && accept(o) && distance_to(o, p) <= kNearObjectTolerance) return true;
    }
    return false;
  };
  const auto linear_host = [](const GeoObject& o) { return is_linear(o.variant); };
  const auto circle_host = [](const GeoObject& o) { return o.variant == Variant::Circle; };
  const auto any_object = [](const GeoObject&) { return true; };

  for (std::size_t ti = 0; ti < plan.tasks.size(); ++ti) {
    const Task& task = plan.tasks[ti];
    const FunctionInfo& fi = info(task.function);
    const int idx = static_cast<int>(ti);
    const std::size_t before = diags.size();
    const auto report = [&](DiagCode code, std::size_t k, const std::string& msg) {
      diags.push_back(Diagnostic{code, idx,
                                 std::string(fi.name) + " point " + std::to_string(k) + " (" + std::to_string(task.points[k].x) +
                                     ", " + std::to_string(task.points[k].y) + "): " + msg});
    };

    if (task.function != Function::AddTextLabel) {
      for (std::size_t k = 0; k < task.points.size(); ++k) {
        const Vec2 p = task.points[k];
        const bool host_role = (k == 0 && (task.function == Function::PerpendicularLine || task.function == Function::ParallelLine)) ||
                               (k == 1 && task.function == Function::Tangents);
        if (host_role) {
          const bool want_linear = task.function != Function::Tangents;
          const char* what = want_linear ? "an existing line, segment or ray" : "an existing circle";
          bool on = false;
          for (const GeoObject& o : prefix.objects()) {
            if ((want_linear ? linear_host(o) : circle_host(o)) && point_on_object(o, p, eps)) on = true;
          }
          if (on) continue;
          const bool later = want_linear ? created_later(idx, p, linear_host) : created_later(idx, p, circle_host);
          const bool near = want_linear ? near_host(p, linear_host) : near_host(p, circle_host);
          if (later) {
            report(DiagCode::UseBeforeCreate, k, std::string("must lie on ") + what + ", which is only created later");
          } else if (near) {
            report(DiagCode::OffObject, k, std::string("is close to but not exactly on ") + what);
          } else {
            report(DiagCode::FloatingRef, k, std::string("does not lie on ") + what);
          }
          continue;
        }
        // Creator functions may place fresh points anywhere.
        if (!fi.requires_existing || resolvable(prefix, p)) continue;
        if (created_later(idx, p, any_object)) {
          report(DiagCode::UseBeforeCreate, k, "references a point or object created by a later task");
        } else if (near_host(p, any_host)) {
          report(DiagCode::OffObject, k, "is close to but not exactly on an existing object");
        } else {
          report(DiagCode::FloatingRef, k, "is neither an existing point nor on an existing object");
        }
      }
    }

    // Commit into the running prefix so later tasks see this one.
    try {
      if (task.function == Function::DrawPoint) {
        for (const Vec2& p : task.points) commit_function(prefix, task.function, std::span(&p, 1), task.text, eps);
      } else {
        commit_function(prefix, task.function, task.points, task.text, eps);
      }
    } catch (const Error& e) {
      if (diags.size() == before) {
        diags.push_back(Diagnostic{DiagCode::MalformedTask, idx, std::string(fi.name) + ": " + e.what()});
      }
    }
  }
  return diags;
}

json ProblemSpec::to_json() const {
  json j{{"id", id}, {"instruction", instruction}};
  if (viewport) j["viewport"] = gcsim::to_json(*viewport);
  if (plan) j["plan"] = plan->to_json();
  if (reference_construction) j["reference_construction"] = reference_construction->to_json();
  return j;
}

ProblemSpec problem_from_json(const json& j, std::string_view fallback_id) {
  ProblemSpec p;
  p.id = std::string(fallback_id);
  json plan_json;
  if (j.is_object() && j.contains("plan")) {
    p.id = j.value("id", p.id);
    p.instruction = j.value("instruction", std::string());
    if (j.contains("viewport")) p.viewport = viewport_from_json(j["viewport"]);
    plan_json = j["plan"];
    if (j.contains("reference_construction")) p.reference_construction = Scene::from_json(j["reference_construction"]);
  } else {
    plan_json = j;
  }
  if (!plan_json.is_null()) {
    ParseResult r = parse_plan_json(plan_json);
    if (!r.ok()) {
      const Diagnostic d = r.diagnostics.empty() ? Diagnostic{DiagCode::MalformedTask, -1, "no plan"} : r.diagnostics.front();
      throw Error(d.code == DiagCode::UnknownFunction ? ErrorCode::UnknownFunction : ErrorCode::MalformedTask, d.message);
    }
    p.plan = std::move(r.plans.front());
    if (const auto diags = validate_dependencies(*p.plan); !diags.empty()) {
      const Diagnostic& d = diags.front();
      const bool ubc = d.code == DiagCode::UseBeforeCreate;
      const std::string msg = (ubc ? std::string() : std::string(to_string(d.code)) + " ") + "task " + std::to_string(d.task_index) + ": " + d.message;
      throw Error(ubc ? ErrorCode::UseBeforeCreate : ErrorCode::MalformedTask, msg);
    }
    if (p.instruction.empty()) p.instruction = p.plan->description;
  }
  return p;
}

ProblemSpec load_problem(std::string_view raw, std::string_view fallback_id) {
  std::vector<std::string> warnings;
  const std::string text = repair_text(raw, warnings);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedTask, std::string("unparseable problem file: ") + e.what());
  }
  return problem_from_json(j, fallback_id);
}

}  // namespace gcsim
