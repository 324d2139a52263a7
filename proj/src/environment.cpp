#include "gcsim/environment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gcsim/error.hpp"
#include "gcsim/hash.hpp"
#include "gcsim/lower.hpp"

namespace gcsim {

using nlohmann::json;

namespace {

constexpr int kMinScreenWidth = 320;
constexpr int kMinScreenHeight = 712;  // the palette column needs this much

std::string_view mode_name(ScreenshotMode m) {
  switch (m) {
    case ScreenshotMode::None: return "none";
    case ScreenshotMode::Hash: return "hash";
    case ScreenshotMode::Files: return "files";
  }
  return "none";
}

ScreenshotMode mode_from_name(std::string_view s) {
  if (s == "none") return ScreenshotMode::None;
  if (s == "hash") return ScreenshotMode::Hash;
  if (s == "files") return ScreenshotMode::Files;
  throw Error(ErrorCode::BadConfig, "unknown screenshot mode '" + std::string(s) + "'");
}

BBox integer_range(const BBox& b) {
  return BBox{std::ceil(b.x_min), std::ceil(b.y_min), std::floor(b.x_max), std::floor(b.y_max)};
}

std::optional<Function> function_for_tool(std::string_view tool) {
  for (const FunctionInfo& fi : function_table()) {
    if (!fi.tool.empty() && fi.tool == tool) return fi.function;
  }
  return std::nullopt;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string describe_created(const Scene& scene, const CommitResult& r) {
  std::string out;
  for (ObjectId id : r.created) {
    if (!out.empty()) out += ",";
    const GeoObject& o = scene.at(id);
    out += std::string(to_string(o.variant));
    out += ":" + o.label;
  }
  return out;
}

void clear_pending(EnvState& s) {
  s.pending.clear();
  s.pending_pixels.clear();
  s.pending_label.reset();
}

bool commit(EnvState& s, Function fn, std::span<const Vec2> pts, std::string_view text, const EnvConfig& cfg,
            std::vector<std::string>& log) {
  try {
    const CommitResult r = commit_function(s.scene, fn, pts, text, cfg.snap_px);
    log.push_back("COMMIT " + std::string(info(fn).name) + " [" + describe_created(s.scene, r) + "]");
    return true;
  } catch (const Error& e) {
    log.push_back(std::string("COMMIT_FAILED ") + e.what());
    return false;
  }
}

// One paint at a screen pixel already known to lie on the canvas.
bool paint_at(EnvState& s, Vec2 pixel, const EnvConfig& cfg, std::vector<std::string>& log) {
  const Function fn = *function_for_tool(*s.palette.active_tool);
  const FunctionInfo& fi = info(fn);
  const Vec2 world = unproject(s.scene.viewport(), pixel);

  if (fn == Function::AddTextLabel) {
    s.pending_label = world;
    log.push_back("LABEL_PENDING");
    return true;
  }
  if (fi.arity == kVariableArity) {
    if (s.pending.size() >= static_cast<std::size_t>(fi.min_points) &&
        distance(pixel, s.pending_pixels.front()) <= cfg.polygon_close_px) {
      const std::vector<Vec2> pts = s.pending;
      clear_pending(s);
      return commit(s, fn, pts, {}, cfg, log);
    }
    s.pending.push_back(world);
    s.pending_pixels.push_back(pixel);
    log.push_back("PENDING " + std::to_string(s.pending.size()));
    return true;
  }
  s.pending.push_back(world);
  s.pending_pixels.push_back(pixel);
  if (s.pending.size() < static_cast<std::size_t>(fi.arity)) {
    log.push_back("PENDING " + std::to_string(s.pending.size()) + "/" + std::to_string(fi.arity));
    return true;
  }
  const std::vector<Vec2> pts = s.pending;
  clear_pending(s);
  return commit(s, fn, pts, {}, cfg, log);
}

bool apply_click(EnvState& s, const Action& a, StepRecord& rec, std::vector<std::string>& log) {
  const Viewport& v = s.scene.viewport();
  rec.normalized_coords = Vec2{a.point.x / v.width, a.point.y / v.height};
  if (!std::isfinite(a.point.x) || !std::isfinite(a.point.y)) {
    rec.bbox = BBox{};
    rec.hit_range = BBox{};
    log.push_back("BAD_PARAMS non-finite click");
    return false;
  }
  const HitTarget hit = hit_test(s, a.point);
  rec.bbox = hit.bbox;
  rec.hit_range = hit.hit_range;
  ToolPalette& p = s.palette;
  switch (hit.kind) {
    case TargetKind::CategoryButton: {
      const Button* b = nullptr;
      for (const Button& c : p.category_buttons) {
        if (c.name == hit.name) b = &c;
      }
      p.active_category = b->category;
      if (p.active_tool && p.tool_button(*p.active_tool)->category != b->category) {
        p.active_tool.reset();
        clear_pending(s);
      }
      s.input_focus = false;
      log.push_back("CATEGORY " + b->category);
      return true;
    }
    case TargetKind::ToolButton: {
      const Button* b = nullptr;
      for (const Button& t : p.tool_buttons) {
        if (t.name == hit.name) b = &t;
      }
      const std::string tool = b->name.substr(tool_button_name("").size());
      if (p.active_category != b->category) {
        log.push_back("TOOL_HIDDEN " + tool + " (category " + b->category + " not active)");
        return false;
      }
      p.active_tool = tool;
      clear_pending(s);
      s.input_focus = false;
      log.push_back("TOOL " + tool);
      return true;
    }
    case TargetKind::InputBar:
      s.input_focus = true;
      log.push_back("INPUT_FOCUS");
      return true;
    case TargetKind::Canvas:
      s.input_focus = false;
      log.push_back("CANVAS");
      return true;
    case TargetKind::DeadZone:
      log.push_back("DEAD_ZONE (" + fmt(a.point.x) + "," + fmt(a.point.y) + ")");
      return false;
  }
  return false;
}

bool apply_paint(EnvState& s, const Action& a, const EnvConfig& cfg, std::vector<std::string>& log) {
  if (!s.palette.active_tool) {
    log.push_back("NO_ACTIVE_TOOL");
    return false;
  }
  if (!std::isfinite(a.point.x) || !std::isfinite(a.point.y)) {
    log.push_back("BAD_PARAMS non-finite paint");
    return false;
  }
  const Viewport& v = s.scene.viewport();
  const double w = v.width, h = v.height;
  const bool inside = a.point.x >= 0.0 && a.point.x <= 1.0 && a.point.y >= 0.0 && a.point.y <= 1.0;
  if (inside) return paint_at(s, Vec2{a.point.x * w, a.point.y * h}, cfg, log);

  log.push_back("OUT_OF_CANVAS (" + fmt(a.point.x) + "," + fmt(a.point.y) + ")");
  const Vec2 clamped{std::clamp(a.point.x * w, 1.0, w - 1.0), std::clamp(a.point.y * h, 1.0, h - 1.0)};
  std::vector<std::string> retry_log;
  const bool ok = paint_at(s, clamped, cfg, retry_log);
  log.push_back(std::string(ok ? "RETRY_OK" : "RETRY_FAILED") + " (" + fmt(clamped.x / w) + "," + fmt(clamped.y / h) + ")");
  log.insert(log.end(), retry_log.begin(), retry_log.end());
  return ok;
}

bool apply_type(EnvState& s, const Action& a, const EnvConfig& cfg, std::vector<std::string>& log) {
  if (a.text.empty()) {
    log.push_back("EMPTY_TEXT");
    return false;
  }
  if (s.pending_label) {
    const Vec2 pos = *s.pending_label;
    s.pending_label.reset();
    return commit(s, Function::AddTextLabel, std::span(&pos, 1), a.text, cfg, log);
  }
  if (s.input_focus) return commit(s, Function::GenerateInputAction, {}, a.text, cfg, log);
  log.push_back("NO_TEXT_TARGET");
  return false;
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

class SequencePolicy final : public Policy {
 public:
  explicit SequencePolicy(std::span<const Action> actions) : actions_(actions) {}
  std::optional<Action> next(const Observation&) override {
    if (i_ >= actions_.size()) return std::nullopt;
    return actions_[i_++];
  }

 private:
  std::span<const Action> actions_;
  std::size_t i_ = 0;
};

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

void EnvConfig::validate() const {
  viewport.validate();
  if (viewport.width < kMinScreenWidth || viewport.height < kMinScreenHeight) {
    throw Error(ErrorCode::BadConfig, "screen must be at least " + std::to_string(kMinScreenWidth) + "x" +
                                          std::to_string(kMinScreenHeight) + " pixels");
  }
  if (!(snap_px >= 0.0)) throw Error(ErrorCode::BadConfig, "snap_px must be >= 0");
  if (!(polygon_close_px > 0.0)) throw Error(ErrorCode::BadConfig, "polygon_close_px must be > 0");
  if (step_budget < 1) throw Error(ErrorCode::BadConfig, "step_budget must be >= 1");
}

json EnvConfig::to_json() const {
  return json{{"viewport", gcsim::to_json(viewport)},
              {"snap_px", snap_px},
              {"polygon_close_px", polygon_close_px},
              {"screenshots", mode_name(screenshots)},
              {"screenshot_prefix", screenshot_prefix},
              {"step_budget", step_budget}};
}

EnvConfig EnvConfig::from_json(const json& j) { return from_json(j, EnvConfig{}); }

EnvConfig EnvConfig::from_json(const json& j, EnvConfig c) {
  try {
    if (j.contains("viewport")) c.viewport = viewport_from_json(j.at("viewport"));
    if (j.contains("snap_px")) c.snap_px = j.at("snap_px").get<double>();
    if (j.contains("polygon_close_px")) c.polygon_close_px = j.at("polygon_close_px").get<double>();
    if (j.contains("screenshots")) c.screenshots = mode_from_name(j.at("screenshots").get<std::string>());
    if (j.contains("screenshot_prefix")) c.screenshot_prefix = j.at("screenshot_prefix").get<std::string>();
    if (j.contains("step_budget")) c.step_budget = j.at("step_budget").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, e.what());
  }
  return c;
}

std::string EnvState::hash() const {
  json pending_json = json::array();
  for (Vec2 p : pending) pending_json.push_back(vec_json(p));
  json pix = json::array();
  for (Vec2 p : pending_pixels) pix.push_back(vec_json(p));
  const json j{{"scene", scene.hash()},
               {"category", palette.active_category ? json(*palette.active_category) : json()},
               {"tool", palette.active_tool ? json(*palette.active_tool) : json()},
               {"input_focus", input_focus},
               {"pending", std::move(pending_json)},
               {"pending_pixels", std::move(pix)},
               {"pending_label", pending_label ? vec_json(*pending_label) : json()},
               {"step_index", step_index}};
  return sha256_hex(j.dump());
}

EnvState reset(const ProblemSpec& problem, const EnvConfig& config) {
  EnvConfig c = config;
  c.viewport = problem.effective_viewport(config.viewport);
  c.validate();
  EnvState s;
  s.scene = Scene(c.viewport);
  s.palette = ToolPalette::standard();
  if (const std::string err = s.palette.check_invariants(c.viewport.width, c.viewport.height); !err.empty()) {
    throw Error(ErrorCode::BadConfig, err);
  }
  return s;
}

std::string_view to_string(TargetKind k) {
  switch (k) {
    case TargetKind::CategoryButton: return "category";
    case TargetKind::ToolButton: return "tool";
    case TargetKind::InputBar: return "input_bar";
    case TargetKind::Canvas: return "canvas";
    case TargetKind::DeadZone: return "dead_zone";
  }
  return "dead_zone";
}

BBox canvas_region(const Viewport& v) {
  return BBox{kPaletteColumnWidth, 0.0, static_cast<double>(v.width), static_cast<double>(v.height)};
}

HitTarget hit_test(const EnvState& state, Vec2 q) {
  const ToolPalette& p = state.palette;
  for (const Button& b : p.category_buttons) {
    if (b.box.contains(q)) return HitTarget{TargetKind::CategoryButton, b.name, b.box, integer_range(b.box)};
  }
  for (const Button& b : p.tool_buttons) {
    if (b.box.contains(q)) return HitTarget{TargetKind::ToolButton, b.name, b.box, integer_range(b.box)};
  }
  if (p.input_bar.box.contains(q)) {
    return HitTarget{TargetKind::InputBar, p.input_bar.name, p.input_bar.box, integer_range(p.input_bar.box)};
  }
  const Viewport& v = state.scene.viewport();
  const BBox canvas = canvas_region(v);
  // Pixels just left of the canvas edge belong to the palette column.
  if (canvas.contains(q) && q.x > canvas.x_min) {
    return HitTarget{TargetKind::Canvas, "canvas", canvas,
                     BBox{canvas.x_min + 1.0, canvas.y_min, canvas.x_max, canvas.y_max}};
  }
  const BBox here{q.x, q.y, q.x, q.y};
  return HitTarget{TargetKind::DeadZone, "dead_zone", here, integer_range(BBox{std::floor(q.x), std::floor(q.y), std::floor(q.x), std::floor(q.y)})};
}

json StepRecord::to_json() const {
  json prev = json::array();
  for (const Action& a : previous_actions) prev.push_back(a.to_json());
  json j{{"screenshot", json{{"path", screenshot.path}, {"sha256", screenshot.sha256}}},
         {"present_task", present_task},
         {"previous_actions", std::move(prev)},
         {"exe_success", exe_success},
         {"exe_log", exe_log},
         {"next_action", next_action ? next_action->to_json() : json{{"done", true}}},
         {"action", action.to_json()},
         {"parameters", action.params()}};
  if (bbox) j["bbox"] = gcsim::to_json(*bbox);
  if (hit_range) j["hit_range"] = gcsim::to_json(*hit_range);
  if (normalized_coords) j["normalized_coords"] = vec_json(*normalized_coords);
  return j;
}

StepRecord StepRecord::from_json(const json& j) {
  StepRecord r;
  try {
    r.screenshot.path = j.at("screenshot").at("path").get<std::string>();
    r.screenshot.sha256 = j.at("screenshot").at("sha256").get<std::string>();
    r.present_task = j.at("present_task").get<std::string>();
    for (const json& a : j.at("previous_actions")) r.previous_actions.push_back(Action::from_json(a));
    r.exe_success = j.at("exe_success").get<bool>();
    r.exe_log = j.at("exe_log").get<std::string>();
    const json& next = j.at("next_action");
    if (!(next.is_object() && next.contains("done"))) r.next_action = Action::from_json(next);
    r.action = Action::from_json(j.at("action"));
    if (j.contains("bbox")) r.bbox = bbox_from_json(j.at("bbox"));
    if (j.contains("hit_range")) r.hit_range = bbox_from_json(j.at("hit_range"));
    if (j.contains("normalized_coords")) {
      const json& n = j.at("normalized_coords");
      r.normalized_coords = Vec2{n.at(0).get<double>(), n.at(1).get<double>()};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedSpec, std::string("step record: ") + e.what());
  }
  return r;
}

StepResult step(const EnvState& state, const Action& action, const EnvConfig& config,
                const std::vector<Action>& previous_actions, std::string present_task, const Raster* observation) {
  StepRecord rec;
  rec.present_task = std::move(present_task);
  rec.previous_actions = previous_actions;
  rec.action = action;

  if (config.screenshots != ScreenshotMode::None) {
    Raster local;
    if (observation == nullptr) {
      local = render_raster(state.scene);
      observation = &local;
    }
    rec.screenshot.sha256 = observation->hash();
    if (config.screenshots == ScreenshotMode::Files) {
      char name[64];
      std::snprintf(name, sizeof name, "_%04d.png", state.step_index);
      rec.screenshot.path = config.screenshot_prefix + name;
      write_png(*observation, config.output_dir / rec.screenshot.path);
    }
  }

  EnvState next = state;
  std::vector<std::string> log;
  bool ok = false;
  switch (action.kind) {
    case ActionKind::Click: ok = apply_click(next, action, rec, log); break;
    case ActionKind::Paint: ok = apply_paint(next, action, config, log); break;
    case ActionKind::Type: ok = apply_type(next, action, config, log); break;
  }
  ++next.step_index;
  rec.exe_success = ok;
  rec.exe_log = join(log);
  return StepResult{std::move(next), std::move(rec)};
}

std::vector<Action> Trajectory::actions() const {
  std::vector<Action> out;
  out.reserve(steps.size());
  for (const StepRecord& r : steps) out.push_back(r.action);
  return out;
}

std::vector<std::string> task_schedule(const ProblemSpec& problem, const Viewport& viewport) {
  std::vector<std::string> out;
  if (!problem.plan) return out;
  try {
    const LoweredProgram prog = lower(*problem.plan, ToolPalette::standard(), viewport);
    for (const ActionGroup& g : prog.groups) {
      const std::string text = problem.plan->tasks[static_cast<std::size_t>(g.task_index)].describe();
      out.insert(out.end(), g.actions.size(), text);
    }
  } catch (const Error&) {
    out.clear();
  }
  return out;
}

Trajectory run_policy(const ProblemSpec& problem, Policy& policy, const EnvConfig& config) {
  EnvConfig cfg = config;
  cfg.viewport = problem.effective_viewport(config.viewport);
  Trajectory t;
  t.problem_id = problem.id;
  t.config = cfg;
  t.plan = problem.plan;

  EnvState s = reset(problem, cfg);
  t.initial_state_hash = s.hash();
  const std::vector<std::string> schedule = task_schedule(problem, cfg.viewport);
  std::vector<Action> history;

  for (;;) {
    const std::size_t idx = t.steps.size();
    const bool need_raster = policy.wants_raster() || cfg.screenshots != ScreenshotMode::None;
    Raster obs;
    if (need_raster) obs = render_raster(s.scene);
    const std::string task = idx < schedule.size() ? schedule[idx] : std::string();
    const Observation o{&s, policy.wants_raster() ? &obs : nullptr, task, history, static_cast<int>(idx)};

    std::optional<Action> a;
    try {
      a = policy.next(o);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TransportClosed) throw;
      t.truncated = true;
      t.truncation_reason = "TRANSPORT_CLOSED";
      break;
    }
    if (!a) break;
    if (static_cast<int>(idx) >= cfg.step_budget) {
      t.truncated = true;
      t.truncation_reason = "STEP_BUDGET_EXCEEDED";
      break;
    }
    if (!t.steps.empty()) t.steps.back().next_action = *a;
    StepResult r = step(s, *a, cfg, history, task, need_raster ? &obs : nullptr);
    s = std::move(r.state);
    history.push_back(*a);
    t.state_hashes.push_back(s.hash());
    t.steps.push_back(std::move(r.record));
  }
  t.final_scene = s.scene;
  t.final_state_hash = s.hash();
  return t;
}

Trajectory run_actions(const ProblemSpec& problem, std::span<const Action> actions, const EnvConfig& config) {
  SequencePolicy policy(actions);
  return run_policy(problem, policy, config);
}

std::filesystem::path meta_path(const std::filesystem::path& p) {
  std::filesystem::path m = p;
  m += ".meta.json";
  return m;
}

void write_trajectory(const Trajectory& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  json digests = json::array();
  for (const StepRecord& r : t.steps) {
    const std::string line = r.to_json().dump();
    digests.push_back(sha256_hex(line));
    out << line << '\n';
  }
  out.close();

  json meta{{"format", "gcsim-trajectory/1"},
            {"problem_id", t.problem_id},
            {"config", t.config.to_json()},
            {"initial_state_hash", t.initial_state_hash},
            {"state_hashes", t.state_hashes},
            {"line_sha256", std::move(digests)},
            {"step_count", t.steps.size()},
            {"final_scene", t.final_scene.to_json()},
            {"final_state_hash", t.final_state_hash},
            {"truncated", t.truncated},
            {"truncation_reason", t.truncation_reason}};
  if (t.plan) meta["plan"] = t.plan->to_json();
  std::ofstream mout(meta_path(path), std::ios::binary);
  if (!mout) throw Error(ErrorCode::Io, "cannot write " + meta_path(path).string());
  mout << meta.dump(1) << '\n';
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

json read_meta(const std::filesystem::path& path) {
  std::ifstream in(meta_path(path), std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "missing trajectory metadata " + meta_path(path).string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedSpec, std::string("trajectory metadata: ") + e.what());
  }
}

}  // namespace

Trajectory read_trajectory(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  const json meta = read_meta(path);
  Trajectory t;
  try {
    t.problem_id = meta.at("problem_id").get<std::string>();
    t.config = EnvConfig::from_json(meta.at("config"));
    t.initial_state_hash = meta.at("initial_state_hash").get<std::string>();
    t.state_hashes = meta.at("state_hashes").get<std::vector<std::string>>();
    t.final_scene = Scene::from_json(meta.at("final_scene"));
    t.final_state_hash = meta.at("final_state_hash").get<std::string>();
    t.truncated = meta.at("truncated").get<bool>();
    t.truncation_reason = meta.at("truncation_reason").get<std::string>();
    if (meta.contains("plan")) {
      ParseResult pr = parse_plan_json(meta.at("plan"));
      if (!pr.ok()) throw Error(ErrorCode::MalformedSpec, "trajectory metadata carries an invalid plan");
      t.plan = pr.plans.front();
    }
    if (meta.at("step_count").get<std::size_t>() != lines.size()) {
      throw Error(ErrorCode::MalformedSpec, "step count differs from the number of records");
    }
    for (const std::string& line : lines) t.steps.push_back(StepRecord::from_json(json::parse(line)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedSpec, std::string("trajectory: ") + e.what());
  }
  t.config.output_dir = path.parent_path();
  return t;
}

ReplayReport replay(const Trajectory& t, const std::filesystem::path& base_dir) {
  ReplayReport rep;
  const auto fail = [&](int step, std::string msg) {
    rep.ok = false;
    if (rep.first_mismatch < 0 && step >= 0) rep.first_mismatch = step;
    rep.problems.push_back(std::move(msg));
  };

  EnvConfig cfg = t.config;
  bool has_shots = false;
  for (const StepRecord& r : t.steps) has_shots = has_shots || !r.screenshot.sha256.empty();
  cfg.screenshots = has_shots ? ScreenshotMode::Hash : ScreenshotMode::None;

  ProblemSpec problem;
  problem.id = t.problem_id;
  problem.viewport = t.config.viewport;
  EnvState s = reset(problem, cfg);
  if (s.hash() != t.initial_state_hash) fail(-1, "initial state hash differs");
  if (t.state_hashes.size() != t.steps.size()) fail(-1, "state hash count differs from step count");

  std::vector<Action> history;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const StepRecord& recorded = t.steps[i];
    StepResult r = step(s, recorded.action, cfg, history, recorded.present_task);
    r.record.next_action = i + 1 < t.steps.size() ? std::optional<Action>(t.steps[i + 1].action) : std::nullopt;
    r.record.screenshot.path = recorded.screenshot.path;
    if (recorded.screenshot.sha256.empty()) r.record.screenshot.sha256.clear();
    const int idx = static_cast<int>(i);
    if (r.record.to_json() != recorded.to_json()) {
      std::string what = "record differs";
      if (r.record.exe_success != recorded.exe_success) what = "exe_success differs";
      else if (r.record.exe_log != recorded.exe_log) what = "exe_log differs";
      else if (r.record.screenshot.sha256 != recorded.screenshot.sha256) what = "screenshot hash differs";
      else if (r.record.previous_actions != recorded.previous_actions) what = "previous_actions differ";
      fail(idx, "step " + std::to_string(i) + ": " + what);
    }
    if (!recorded.screenshot.path.empty() && !base_dir.empty()) {
      const auto file = base_dir / recorded.screenshot.path;
      try {
        if (read_png(file).hash() != recorded.screenshot.sha256) {
          fail(idx, "step " + std::to_string(i) + ": raster file " + recorded.screenshot.path + " does not match its hash");
        }
      } catch (const Error& e) {
        fail(idx, "step " + std::to_string(i) + ": " + e.what());
      }
    }
    s = std::move(r.state);
    history.push_back(recorded.action);
    if (i < t.state_hashes.size() && s.hash() != t.state_hashes[i]) {
      fail(idx, "step " + std::to_string(i) + ": state hash differs");
    }
  }
  if (s.hash() != t.final_state_hash) fail(-1, "final state hash differs");
  if (s.scene.hash() != t.final_scene.hash()) fail(-1, "final scene differs");
  return rep;
}

ReplayReport replay_file(const std::filesystem::path& path) {
  ReplayReport rep;
  std::vector<std::string> lines;
  json meta;
  try {
    lines = read_lines(path);
    meta = read_meta(path);
  } catch (const Error& e) {
    rep.ok = false;
    rep.problems.push_back(e.what());
    return rep;
  }
  const json digests = meta.value("line_sha256", json::array());
  if (digests.size() != lines.size()) {
    rep.ok = false;
    rep.problems.push_back("record count differs from the recorded digests");
  }
  for (std::size_t i = 0; i < lines.size() && i < digests.size(); ++i) {
    if (!digests[i].is_string() || sha256_hex(lines[i]) != digests[i].get<std::string>()) {
      rep.ok = false;
      if (rep.first_mismatch < 0) rep.first_mismatch = static_cast<int>(i);
      rep.problems.push_back("step " + std::to_string(i) + ": record digest mismatch");
    }
  }
  try {
    const Trajectory t = read_trajectory(path);
    ReplayReport inner = replay(t, path.parent_path());
    if (!inner.ok) {
      rep.ok = false;
      if (rep.first_mismatch < 0 || (inner.first_mismatch >= 0 && inner.first_mismatch < rep.first_mismatch)) {
        rep.first_mismatch = inner.first_mismatch;
      }
      rep.problems.insert(rep.problems.end(), inner.problems.begin(), inner.problems.end());
    }
  } catch (const Error& e) {
    rep.ok = false;
    rep.problems.push_back(e.what());
  }
  return rep;
}

}  // namespace gcsim
