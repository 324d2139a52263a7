#include "gcsim/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "gcsim/error.hpp"
#include "gcsim/lower.hpp"

namespace gcsim {

using nlohmann::json;

namespace {

std::string lower_case(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::OutOfRange, std::string(name) + " must lie in [0, 1]");
}

double clamp01(double v) { return std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0; }

// Point indices of `star` by object id, plus the nearest-star-point map for `hat`.
std::vector<const GeoObject*> points_of(const Scene& s) {
  std::vector<const GeoObject*> out;
  for (const GeoObject& o : s.objects()) {
    if (o.is_point()) out.push_back(&o);
  }
  return out;
}

void expand(const Scene& scene, ObjectId id, const std::vector<int>& point_index, std::vector<int>& out, int depth = 0) {
  const GeoObject& o = scene.at(id);
  if (o.is_point()) {
    out.push_back(point_index[static_cast<std::size_t>(id)]);
    return;
  }
  if (depth > 64) return;
  for (ObjectId r : o.ref_ids()) expand(scene, r, point_index, out, depth + 1);
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

bool parameter_correct(const Action& pred, const Action& gt) {
  if (gt.kind == ActionKind::Click && !gt.target) throw Error(ErrorCode::MissingAnnotation, "click annotation lacks a bounding box");
  if (pred.kind != gt.kind) return false;
  switch (gt.kind) {
    case ActionKind::Type:
      return lower_case(pred.text) == lower_case(gt.text);
    case ActionKind::Click:
      return gt.target->contains(pred.point);
    case ActionKind::Paint: {
      const double dx = kEvalScreenWidth * (pred.point.x - gt.point.x);
      const double dy = kEvalScreenHeight * (pred.point.y - gt.point.y);
      return std::sqrt(dx * dx + dy * dy) <= kPaintTolerancePx + kPaintSlackPx;
    }
  }
  return false;
}

GroundTruth GroundTruth::from_plan(const TaskPlan& plan, const Viewport& viewport) {
  const LoweredProgram prog = lower(plan, ToolPalette::standard(), viewport);
  return GroundTruth{prog.flatten(), prog.task_of_step()};
}

GroundTruth GroundTruth::from_trajectory(const Trajectory& traj) {
  GroundTruth gt;
  int task = -1;
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const StepRecord& r = traj.steps[i];
    Action a = r.action;
    if (a.kind == ActionKind::Click && r.bbox) a.target = r.bbox;
    if (i == 0 || r.present_task != traj.steps[i - 1].present_task) ++task;
    gt.actions.push_back(std::move(a));
    gt.task_of_step.push_back(task);
  }
  return gt;
}

double middle_process_score(double tsr, double ssr, double pa, double aa) { return 0.6 * tsr + 0.2 * ssr + 0.1 * pa + 0.1 * aa; }

MiddleMetrics middle_metrics(std::span<const Action> pred, const GroundTruth& gt) {
  if (gt.actions.empty()) throw Error(ErrorCode::EmptyReference, "ground truth has no steps");
  if (gt.task_of_step.size() != gt.actions.size()) throw Error(ErrorCode::MalformedSpec, "task grouping does not cover every step");
  MiddleMetrics m;
  for (std::size_t i = 0; i < gt.actions.size(); ++i) {
    StepFlags f;
    if (i < pred.size()) {
      f.type_ok = pred[i].kind == gt.actions[i].kind;
      f.param_ok = parameter_correct(pred[i], gt.actions[i]);
    } else if (gt.actions[i].kind == ActionKind::Click && !gt.actions[i].target) {
      throw Error(ErrorCode::MissingAnnotation, "click annotation lacks a bounding box");
    }
    m.steps.push_back(f);
  }
  // Tasks in order of first appearance.
  std::vector<int> order;
  for (int t : gt.task_of_step) {
    if (std::find(order.begin(), order.end(), t) == order.end()) order.push_back(t);
  }
  std::vector<double> aa, pa, ssr, tsr;
  for (int t : order) {
    TaskMetrics tm;
    tm.task_index = t;
    int a = 0, p = 0, s = 0;
    for (std::size_t i = 0; i < m.steps.size(); ++i) {
      if (gt.task_of_step[i] != t) continue;
      ++tm.steps;
      a += m.steps[i].type_ok;
      p += m.steps[i].param_ok;
      s += m.steps[i].type_ok && m.steps[i].param_ok;
    }
    tm.aa = static_cast<double>(a) / tm.steps;
    tm.pa = static_cast<double>(p) / tm.steps;
    tm.ssr = static_cast<double>(s) / tm.steps;
    tm.success = s == tm.steps;
    aa.push_back(tm.aa);
    pa.push_back(tm.pa);
    ssr.push_back(tm.ssr);
    tsr.push_back(tm.success ? 1.0 : 0.0);
    m.tasks.push_back(tm);
  }
  m.aa = mean(aa);
  m.pa = mean(pa);
  m.ssr = mean(ssr);
  m.tsr = mean(tsr);
  m.mps = middle_process_score(m.tsr, m.ssr, m.pa, m.aa);
  return m;
}

std::vector<Command> scene_commands(const Scene& scene, const std::vector<int>& point_index) {
  std::vector<Command> out;
  for (const GeoObject& o : scene.objects()) {
    Command c;
    if (o.is_point()) {
      if (o.point_kind == PointKind::Free) continue;
      c.name = o.point_kind == PointKind::Midpoint ? "midpoint" : "point-on-object";
    } else if (o.variant == Variant::TextLabel || o.variant == Variant::Expression) {
      c.name = std::string(to_string(o.variant)) + ":" + lower_case(o.text);
    } else {
      c.name = std::string(to_string(o.variant));
    }
    for (ObjectId r : o.ref_ids()) expand(scene, r, point_index, c.inputs);
    std::sort(c.inputs.begin(), c.inputs.end());
    out.push_back(std::move(c));
  }
  return out;
}

OtcScore otc_score(const Scene& hat, const Scene& star) {
  if (star.empty()) throw Error(ErrorCode::EmptyReference, "reference scene is empty");
  const double scale = star.viewport().half_diagonal();
  const auto pstar = points_of(star);
  const auto phat = points_of(hat);

  std::vector<int> star_index(star.size(), -1), hat_index(hat.size(), -1);
  for (std::size_t j = 0; j < pstar.size(); ++j) star_index[static_cast<std::size_t>(pstar[j]->id)] = static_cast<int>(j);

  OtcScore s;
  std::vector<double> best(pstar.size(), 0.0);
  for (const GeoObject* p : phat) {
    int nearest = -1;
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pstar.size(); ++j) {
      const double d = distance(p->position(), pstar[j]->position()) / scale;
      if (d < dmin) {  // strict: ties keep the lower reference index
        dmin = d;
        nearest = static_cast<int>(j);
      }
    }
    hat_index[static_cast<std::size_t>(p->id)] = nearest;
    if (nearest >= 0 && dmin <= kPointTolerance) {
      best[static_cast<std::size_t>(nearest)] = std::max(best[static_cast<std::size_t>(nearest)], std::exp(-5.0 * dmin));
    }
  }
  if (pstar.empty()) {
    s.s_point = phat.empty() ? 1.0 : 0.0;
  } else {
    double sum = 0.0;
    for (double b : best) sum += b;
    s.s_point = sum / static_cast<double>(pstar.size());
  }

  std::vector<Command> cstar = scene_commands(star, star_index);
  const std::vector<Command> chat = scene_commands(hat, hat_index);
  if (cstar.empty()) {
    s.s_cmd = 1.0;
  } else {
    std::sort(cstar.begin(), cstar.end());
    std::vector<char> used(cstar.size(), 0);
    int matched = 0;
    for (const Command& c : chat) {
      auto [lo, hi] = std::equal_range(cstar.begin(), cstar.end(), c);
      for (auto it = lo; it != hi; ++it) {
        const auto k = static_cast<std::size_t>(it - cstar.begin());
        if (!used[k]) {
          used[k] = 1;
          ++matched;
          break;
        }
      }
    }
    s.s_cmd = static_cast<double>(matched) / static_cast<double>(cstar.size());
  }
  s.otc = 0.4 * s.s_point + 0.6 * s.s_cmd;
  return s;
}

JudgeFile::JudgeFile(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedSpec, "judge file must map problem ids to scores");
  for (const auto& [id, v] : j.items()) {
    const auto get = [&](const char* upper, const char* lower) {
      if (v.contains(upper)) return v.at(upper).get<double>();
      if (v.contains(lower)) return v.at(lower).get<double>();
      throw Error(ErrorCode::MalformedSpec, "judge entry '" + id + "' lacks " + upper);
    };
    try {
      scores_[id] = JudgeScores{clamp01(get("TC", "tc")), clamp01(get("VS", "vs")), clamp01(get("GL", "gl")), "external"};
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedSpec, "judge entry '" + id + "': " + e.what());
    }
  }
}

JudgeFile JudgeFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ProviderUnavailable, "cannot read judge file " + path.string());
  try {
    return JudgeFile(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedSpec, std::string("judge file: ") + e.what());
  }
}

std::optional<JudgeScores> JudgeFile::lookup(const std::string& problem_id) const {
  const auto it = scores_.find(problem_id);
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

JudgeScores fallback_judge(const Scene& hat, const Scene& star) {
  JudgeScores j;
  j.provider = "rule-based-fallback";
  j.tc = star.empty() ? 1.0 : otc_score(hat, star).s_cmd;
  Scene hat_on_star_view = Scene::from_json([&] {
    json h = hat.to_json();
    h["viewport"] = to_json(star.viewport());
    return h;
  }());
  j.vs = 1.0 - raster_difference(render_raster(star), render_raster(hat_on_star_view));
  const GeoDistance g = geo_distance_breakdown(hat, star);
  if (g.relations > 0) {
    j.gl = 1.0 - static_cast<double>(g.violated) / g.relations;
  } else if (star.empty()) {
    j.gl = 1.0;
  } else {
    int present = 0;
    for (const GeoObject& o : star.objects()) present += object_present(hat_on_star_view, o);
    j.gl = static_cast<double>(present) / static_cast<double>(star.size());
  }
  return j;
}

JudgeScores judge(const std::string& problem_id, const Scene& hat, const Scene& star, const JudgeFile* provider) {
  if (provider != nullptr) {
    if (auto s = provider->lookup(problem_id)) return *s;
  }
  return fallback_judge(hat, star);
}

double final_result_score(double otc, double tc, double vs, double gl) {
  check_unit(otc, "OTC");
  check_unit(tc, "TC");
  check_unit(vs, "VS");
  check_unit(gl, "GL");
  return 0.3 * otc + 0.3 * tc + 0.2 * vs + 0.2 * gl;
}

double overall_score(double mps, double frs) {
  check_unit(mps, "MPS");
  check_unit(frs, "FRS");
  return 0.5 * (mps + frs);
}

ScoreReport score(const std::string& problem_id, std::span<const Action> pred, const GroundTruth& gt, const Scene& hat,
                  const Scene& star, const JudgeFile* provider) {
  ScoreReport r;
  r.problem_id = problem_id;
  const MiddleMetrics m = middle_metrics(pred, gt);
  r.aa = m.aa;
  r.pa = m.pa;
  r.ssr = m.ssr;
  r.tsr = m.tsr;
  r.mps = m.mps;
  r.tasks = m.tasks;
  r.steps = m.steps;
  r.otc = otc_score(hat, star);
  r.judge = judge(problem_id, hat, star, provider);
  r.frs = final_result_score(r.otc.otc, r.judge.tc, r.judge.vs, r.judge.gl);
  r.os = overall_score(r.mps, r.frs);
  return r;
}

ScoreReport aggregate(std::span<const ScoreReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::EmptyReference, "nothing to aggregate");
  ScoreReport a;
  a.problem_id = "macro";
  a.problems = 0;
  const double n = static_cast<double>(reports.size());
  bool all_external = true;
  for (const ScoreReport& r : reports) {
    a.problems += r.problems;
    a.aa += r.aa / n;
    a.pa += r.pa / n;
    a.ssr += r.ssr / n;
    a.tsr += r.tsr / n;
    a.otc.s_point += r.otc.s_point / n;
    a.otc.s_cmd += r.otc.s_cmd / n;
    a.otc.otc += r.otc.otc / n;
    a.judge.tc += r.judge.tc / n;
    a.judge.vs += r.judge.vs / n;
    a.judge.gl += r.judge.gl / n;
    all_external = all_external && r.judge.provider == "external";
  }
  a.judge.provider = all_external ? "external" : "mixed";
  const auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
  a.mps = middle_process_score(a.tsr, a.ssr, a.pa, a.aa);
  a.frs = final_result_score(unit(a.otc.otc), unit(a.judge.tc), unit(a.judge.vs), unit(a.judge.gl));
  a.os = overall_score(unit(a.mps), unit(a.frs));
  return a;
}

json ScoreReport::to_json() const {
  json tasks_json = json::array();
  for (const TaskMetrics& t : tasks) {
    tasks_json.push_back(json{{"task_index", t.task_index}, {"steps", t.steps}, {"AA", t.aa}, {"PA", t.pa}, {"SSR", t.ssr}, {"success", t.success}});
  }
  json steps_json = json::array();
  for (const StepFlags& f : steps) steps_json.push_back(json{{"type_ok", f.type_ok}, {"param_ok", f.param_ok}});
  json j{{"problem_id", problem_id},
         {"problems", problems},
         {"AA", aa},
         {"PA", pa},
         {"SSR", ssr},
         {"TSR", tsr},
         {"MPS", mps},
         {"OTC", otc.otc},
         {"s_point", otc.s_point},
         {"s_cmd", otc.s_cmd},
         {"TC", judge.tc},
         {"VS", judge.vs},
         {"GL", judge.gl},
         {"judge_provider", judge.provider},
         {"FRS", frs},
         {"OS", os},
         {"per_task", std::move(tasks_json)},
         {"steps", std::move(steps_json)}};
  if (reward) j["reward"] = reward->to_json();
  return j;
}

std::string ScoreReport::table() const {
  std::string out = "problem " + problem_id + (problems > 1 ? " (" + std::to_string(problems) + " problems)" : "") + "\n";
  const auto row = [&](const char* name, double v) { out += std::string("  ") + name + std::string(8 - std::string(name).size(), ' ') + fixed(v) + "\n"; };
  row("AA", aa);
  row("PA", pa);
  row("SSR", ssr);
  row("TSR", tsr);
  row("MPS", mps);
  row("s_point", otc.s_point);
  row("s_cmd", otc.s_cmd);
  row("OTC", otc.otc);
  row("TC", judge.tc);
  row("VS", judge.vs);
  row("GL", judge.gl);
  row("FRS", frs);
  row("OS", os);
  out += "  judge   " + judge.provider + "\n";
  if (reward) {
    row("R", reward->total);
    row("d_geo", reward->d_geo);
  }
  return out;
}

}  // namespace gcsim
