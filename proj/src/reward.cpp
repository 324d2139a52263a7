#include "gcsim/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "gcsim/error.hpp"
#include "gcsim/lower.hpp"

namespace gcsim {

using nlohmann::json;

namespace {

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
  }
  return true;
}

// Anchor orderings that describe the same object.
std::vector<std::vector<std::size_t>> anchor_orders(Variant v, std::size_t n) {
  std::vector<std::size_t> id(n);
  std::iota(id.begin(), id.end(), 0);
  std::vector<std::vector<std::size_t>> out{id};
  if ((v == Variant::Segment || v == Variant::Line) && n >= 2) {
    auto r = id;
    std::swap(r[0], r[1]);
    out.push_back(r);
  } else if (v == Variant::Polygon && n >= 3) {
    out.clear();
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<std::size_t> fwd(n), bwd(n);
      for (std::size_t k = 0; k < n; ++k) {
        fwd[k] = (s + k) % n;
        bwd[k] = (s + n - k) % n;
      }
      out.push_back(fwd);
      out.push_back(bwd);
    }
  }
  return out;
}

bool comparable(const GeoObject& a, const GeoObject& b) {
  if (a.variant != b.variant) return false;
  if ((a.variant == Variant::TextLabel || a.variant == Variant::Expression) && !iequals(a.text, b.text)) return false;
  return anchors(a).size() == anchors(b).size();
}

// Best ordering of b's anchors against a's: (mean distance, max distance) under `metric`.
template <typename Metric>
std::pair<double, double> anchor_cost(const GeoObject& a, const GeoObject& b, Metric metric) {
  const std::vector<Vec2> pa = anchors(a), pb = anchors(b);
  if (pa.empty()) return {0.0, 0.0};
  double best_mean = std::numeric_limits<double>::infinity(), best_max = best_mean;
  for (const auto& order : anchor_orders(a.variant, pa.size())) {
    double sum = 0.0, mx = 0.0;
    for (std::size_t k = 0; k < pa.size(); ++k) {
      const double d = metric(pa[k], pb[order[k]]);
      sum += d;
      mx = std::max(mx, d);
    }
    const double mean = sum / static_cast<double>(pa.size());
    if (mean < best_mean) {
      best_mean = mean;
      best_max = mx;
    }
  }
  return {best_mean, best_max};
}

}  // namespace

bool object_present(const Scene& scene, const GeoObject& ref) {
  const Viewport& v = scene.viewport();
  const auto px = [&](Vec2 a, Vec2 b) { return distance(project(v, a), project(v, b)); };
  for (const GeoObject& o : scene.objects()) {
    if (comparable(ref, o) && anchor_cost(ref, o, px).second <= kSatisfiedPixels) return true;
  }
  return false;
}

namespace {

bool near_pixel(const Viewport& v, Vec2 pixel, Vec2 world) { return distance(pixel, project(v, world)) <= kSatisfiedPixels; }

Candidate click_candidate(const Button& b, int task) { return Candidate{Action::click(b.name, b.box.center(), b.box), b.box, task}; }

void select_tool(const AdmissibleContext& ctx, const EnvState& s, const FunctionInfo& fi, int task, std::vector<Candidate>& out) {
  if (s.palette.active_category == fi.category) {
    out.push_back(click_candidate(*ctx.palette.tool_button(fi.tool), task));
  } else {
    out.push_back(click_candidate(*ctx.palette.category_button(fi.category), task));
  }
}

void task_candidates(const AdmissibleContext& ctx, const EnvState& s, int t, std::vector<Candidate>& out) {
  const Task& task = ctx.plan.tasks[static_cast<std::size_t>(t)];
  const FunctionInfo& fi = info(task.function);
  const Viewport& v = s.scene.viewport();
  const std::string otype(fi.object_type);

  if (task.function == Function::GenerateInputAction) {
    out.push_back(click_candidate(ctx.palette.input_bar, t));
    if (s.input_focus && !s.pending_label) out.push_back(Candidate{Action::type(otype, task.text), std::nullopt, t});
    return;
  }
  if (s.palette.active_tool != fi.tool) {
    select_tool(ctx, s, fi, t, out);
    return;
  }
  const std::vector<Vec2> targets = task.paint_targets();
  const auto paint = [&](Vec2 w) { out.push_back(Candidate{Action::paint(otype, normalized_canvas(v, w)), std::nullopt, t}); };

  if (task.function == Function::AddTextLabel) {
    if (s.pending_label && distance(project(v, *s.pending_label), project(v, targets.front())) <= kSatisfiedPixels) {
      out.push_back(Candidate{Action::type(otype, task.text), std::nullopt, t});
    } else {
      paint(targets.front());
    }
    return;
  }
  if (task.function == Function::DrawPoint) {
    for (Vec2 p : targets) {
      bool exists = false;
      for (const GeoObject& o : s.scene.objects()) exists = exists || (o.is_point() && near_pixel(v, project(v, o.position()), p));
      if (!exists) paint(p);
    }
    return;
  }
  const std::size_t k = s.pending_pixels.size();
  bool prefix = k < targets.size();
  for (std::size_t i = 0; prefix && i < k; ++i) prefix = near_pixel(v, s.pending_pixels[i], targets[i]);
  if (prefix) {
    paint(targets[k]);
  } else {
    // Pending paints belong to something else: re-selecting the tool clears them.
    out.push_back(click_candidate(*ctx.palette.tool_button(fi.tool), t));
  }
}

std::optional<double> radius_of(const GeoObject& o) {
  switch (o.variant) {
    case Variant::Circle: return distance(o.coords[0], o.coords[1]);
    case Variant::Semicircle: return 0.5 * distance(o.coords[0], o.coords[1]);
    case Variant::CircularSector: return distance(o.coords[0], o.coords[1]);
    default: return std::nullopt;
  }
}

bool is_carrier(const GeoObject& o) {
  return !o.is_point() && o.variant != Variant::TextLabel && o.variant != Variant::Expression;
}

bool direct_ref(const GeoObject& a, ObjectId b) {
  const auto refs = a.ref_ids();
  return std::find(refs.begin(), refs.end(), b) != refs.end();
}

Vec2 unit_direction(const GeoObject& o) {
  const Vec2 d = o.lines.front().direction;
  return (1.0 / norm(d)) * d;
}

bool holds(const GeoObject& a, const GeoObject& b, RelationKind kind, double tol) {
  switch (kind) {
    case RelationKind::Incidence:
      return a.is_point() && is_carrier(b) && distance_to(b, a.position()) <= tol;
    case RelationKind::Parallel:
      return is_linear(a.variant) && is_linear(b.variant) && std::abs(cross(unit_direction(a), unit_direction(b))) <= tol;
    case RelationKind::Perpendicular:
      return is_linear(a.variant) && is_linear(b.variant) && std::abs(dot(unit_direction(a), unit_direction(b))) <= tol;
    case RelationKind::EqualRadius: {
      const auto ra = radius_of(a), rb = radius_of(b);
      return ra && rb && std::abs(*ra - *rb) <= tol;
    }
  }
  return false;
}

struct Match {
  double cost;
  std::size_t star;
  std::size_t hat;
};

// Greedy: cheapest compatible pair first, ties by reference then constructed index.
std::vector<Match> greedy(const std::vector<const GeoObject*>& hat, const std::vector<const GeoObject*>& star) {
  std::vector<Match> pairs;
  const auto world = [](Vec2 a, Vec2 b) { return distance(a, b); };
  for (std::size_t j = 0; j < star.size(); ++j) {
    for (std::size_t i = 0; i < hat.size(); ++i) {
      if (comparable(*star[j], *hat[i])) pairs.push_back(Match{anchor_cost(*star[j], *hat[i], world).first, j, i});
    }
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const Match& a, const Match& b) { return std::tie(a.cost, a.star, a.hat) < std::tie(b.cost, b.star, b.hat); });
  std::vector<char> used_star(star.size(), 0), used_hat(hat.size(), 0);
  std::vector<Match> chosen;
  for (const Match& m : pairs) {
    if (used_star[m.star] || used_hat[m.hat]) continue;
    used_star[m.star] = used_hat[m.hat] = 1;
    chosen.push_back(m);
  }
  return chosen;
}

}  // namespace

void RewardParams::validate() const {
  if (!(lambda_a >= 0 && lambda_p >= 0 && lambda_g >= 0)) throw Error(ErrorCode::BadConfig, "reward weights must be >= 0");
  if (!(sigma_p > 0 && sigma_g > 0)) throw Error(ErrorCode::BadConfig, "reward scales must be > 0");
}

json RewardParams::to_json() const {
  return json{{"lambda_a", lambda_a}, {"lambda_p", lambda_p}, {"lambda_g", lambda_g}, {"sigma_p", sigma_p}, {"sigma_g", sigma_g}};
}

RewardParams RewardParams::from_json(const json& j) {
  RewardParams p;
  try {
    p.lambda_a = j.value("lambda_a", p.lambda_a);
    p.lambda_p = j.value("lambda_p", p.lambda_p);
    p.lambda_g = j.value("lambda_g", p.lambda_g);
    p.sigma_p = j.value("sigma_p", p.sigma_p);
    p.sigma_g = j.value("sigma_g", p.sigma_g);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, e.what());
  }
  p.validate();
  return p;
}

AdmissibleContext::AdmissibleContext(TaskPlan p, const Viewport& viewport)
    : plan(std::move(p)), reference(build_reference(plan, viewport)), graph(build_construction_graph(plan)) {}

std::vector<bool> satisfied_tasks(const AdmissibleContext& ctx, const EnvState& state) {
  std::vector<bool> done(ctx.plan.tasks.size(), true);
  for (std::size_t t = 0; t < done.size(); ++t) {
    for (ObjectId id : ctx.reference.tasks[t].created) {
      if (!object_present(state.scene, ctx.reference.scene.at(id))) {
        done[t] = false;
        break;
      }
    }
  }
  return done;
}

AdmissibleSet admissible_set(const AdmissibleContext& ctx, const EnvState& state) {
  AdmissibleSet set;
  set.step_index = state.step_index;
  const std::vector<bool> done = satisfied_tasks(ctx, state);
  if (std::all_of(done.begin(), done.end(), [](bool b) { return b; })) {
    set.terminal = true;
    return set;
  }
  int first_open = -1;
  for (int t = 0; t < static_cast<int>(done.size()); ++t) {
    if (done[static_cast<std::size_t>(t)]) continue;
    if (first_open < 0) first_open = t;
    bool ready = true;
    for (int u : ctx.graph.predecessors(t)) ready = ready && done[static_cast<std::size_t>(u)];
    if (ready) task_candidates(ctx, state, t, set.candidates);
  }
  if (set.candidates.empty()) task_candidates(ctx, state, first_open, set.candidates);
  return set;
}

double action_distance(const Action& pred, const Candidate& gt, const Viewport& viewport, const RewardParams& params) {
  if (pred.kind != gt.action.kind) throw Error(ErrorCode::KindMismatch, "action distance needs matching kinds");
  const double m = params.mismatch();
  const double object_term = pred.object_type == gt.action.object_type ? 0.0 : m;
  switch (pred.kind) {
    case ActionKind::Type:
      return object_term + (iequals(pred.text, gt.action.text) ? 0.0 : m);
    case ActionKind::Click: {
      const BBox region = gt.region.value_or(BBox{gt.action.point.x, gt.action.point.y, gt.action.point.x, gt.action.point.y});
      return object_term + (region.contains(pred.point) ? 0.0 : m);
    }
    case ActionKind::Paint: {
      const double dx = viewport.width * (pred.point.x - gt.action.point.x);
      const double dy = viewport.height * (pred.point.y - gt.action.point.y);
      const double d = std::sqrt(dx * dx + dy * dy);
      return object_term + (std::isfinite(d) ? d : m);
    }
  }
  return m;
}

double step_reward(const Action& pred, const AdmissibleSet& set, const Viewport& viewport, const RewardParams& params) {
  if (set.terminal) return 0.0;
  if (set.candidates.empty()) throw Error(ErrorCode::EmptyAdmissibleSet, "no admissible action at step " + std::to_string(set.step_index));
  double best = 0.0;
  for (const Candidate& c : set.candidates) {
    if (c.action.kind != pred.kind) continue;
    best = std::max(best, params.lambda_a + params.lambda_p * std::exp(-action_distance(pred, c, viewport, params) / params.sigma_p));
  }
  return best;
}

std::string_view to_string(RelationKind k) {
  switch (k) {
    case RelationKind::Incidence: return "incidence";
    case RelationKind::Parallel: return "parallel";
    case RelationKind::Perpendicular: return "perpendicular";
    case RelationKind::EqualRadius: return "equal-radius";
  }
  return "incidence";
}

std::vector<Relation> find_relations(const Scene& scene, double tol) {
  std::vector<Relation> out;
  const auto objs = scene.objects();
  for (const GeoObject& p : objs) {
    if (!p.is_point()) continue;
    for (const GeoObject& o : objs) {
      // Incidences implied by the definition itself carry no information.
      if (!is_carrier(o) || direct_ref(p, o.id) || direct_ref(o, p.id)) continue;
      if (holds(p, o, RelationKind::Incidence, tol)) out.push_back(Relation{RelationKind::Incidence, p.id, o.id});
    }
  }
  for (std::size_t i = 0; i < objs.size(); ++i) {
    for (std::size_t j = i + 1; j < objs.size(); ++j) {
      const GeoObject& a = objs[i];
      const GeoObject& b = objs[j];
      for (RelationKind k : {RelationKind::Parallel, RelationKind::Perpendicular, RelationKind::EqualRadius}) {
        if (holds(a, b, k, tol)) out.push_back(Relation{k, a.id, b.id});
      }
    }
  }
  return out;
}

bool relation_holds(const Scene& scene, const Relation& r, double tol) {
  const GeoObject* a = scene.find(r.a);
  const GeoObject* b = scene.find(r.b);
  return a != nullptr && b != nullptr && holds(*a, *b, r.kind, tol);
}

GeoDistance geo_distance_breakdown(const Scene& hat, const Scene& star, const GeoWeights& w) {
  GeoDistance g;
  std::vector<const GeoObject*> hat_shapes, star_shapes, hat_labels, star_labels;
  for (const GeoObject& o : hat.objects()) (o.variant == Variant::TextLabel ? hat_labels : hat_shapes).push_back(&o);
  for (const GeoObject& o : star.objects()) (o.variant == Variant::TextLabel ? star_labels : star_shapes).push_back(&o);

  const std::vector<Match> shapes = greedy(hat_shapes, star_shapes);
  double sum = 0.0;
  for (const Match& m : shapes) {
    sum += m.cost;
    g.matches.emplace_back(star_shapes[m.star]->id, hat_shapes[m.hat]->id);
  }
  g.matched = static_cast<int>(shapes.size());
  g.unmatched = static_cast<int>(hat_shapes.size() + star_shapes.size() - 2 * shapes.size());
  if (g.matched + g.unmatched > 0) g.anchor_term = (sum + w.unmatched_penalty * g.unmatched) / (g.matched + g.unmatched);

  const std::vector<Relation> rels = find_relations(star);
  g.relations = static_cast<int>(rels.size());
  for (const Relation& r : rels) {
    const auto map = [&](ObjectId id) -> std::optional<ObjectId> {
      for (const auto& [s, h] : g.matches) {
        if (s == id) return h;
      }
      return std::nullopt;
    };
    const auto a = map(r.a), b = map(r.b);
    if (!a || !b || !relation_holds(hat, Relation{r.kind, *a, *b}, w.relation_tol)) ++g.violated;
  }
  if (g.relations > 0) g.relation_term = static_cast<double>(g.violated) / g.relations;

  const std::vector<Match> labels = greedy(hat_labels, star_labels);
  double lsum = 0.0;
  for (const Match& m : labels) lsum += m.cost;
  g.labels_matched = static_cast<int>(labels.size());
  g.labels_unmatched = static_cast<int>(hat_labels.size() + star_labels.size() - 2 * labels.size());
  if (g.labels_matched + g.labels_unmatched > 0) {
    g.label_term = (lsum + w.unmatched_penalty * g.labels_unmatched) / (g.labels_matched + g.labels_unmatched);
  }
  g.total = w.anchor * g.anchor_term + w.relation * g.relation_term + w.label * g.label_term;
  return g;
}

double geo_distance(const Scene& hat, const Scene& star, const GeoWeights& w) { return geo_distance_breakdown(hat, star, w).total; }

json TrajectoryReward::to_json() const {
  return json{{"step_rewards", step_rewards}, {"mean_step", mean_step}, {"d_geo", d_geo}, {"validity", validity}, {"total", total}};
}

TrajectoryReward trajectory_reward(const Trajectory& traj, const Scene& reference, const RewardParams& params,
                                   const AdmissibleContext* ctx) {
  params.validate();
  if (traj.steps.empty()) throw Error(ErrorCode::EmptyTrajectory, "trajectory has no steps");
  std::optional<AdmissibleContext> local;
  if (ctx == nullptr) {
    if (!traj.plan) throw Error(ErrorCode::NoPlan, "trajectory carries no plan for admissible sets");
    local.emplace(*traj.plan, traj.config.viewport);
    ctx = &*local;
  }
  EnvConfig cfg = traj.config;
  cfg.screenshots = ScreenshotMode::None;
  ProblemSpec problem;
  problem.id = traj.problem_id;
  problem.viewport = cfg.viewport;
  EnvState state = reset(problem, cfg);

  TrajectoryReward out;
  for (const StepRecord& rec : traj.steps) {
    const AdmissibleSet set = admissible_set(*ctx, state);
    out.step_rewards.push_back(step_reward(rec.action, set, cfg.viewport, params));
    state = step(state, rec.action, cfg).state;
  }
  out.mean_step = std::accumulate(out.step_rewards.begin(), out.step_rewards.end(), 0.0) / out.step_rewards.size();
  out.d_geo = geo_distance(traj.final_scene, reference);
  out.validity = params.lambda_g * std::exp(-out.d_geo / params.sigma_g);
  out.total = out.mean_step + out.validity;
  return out;
}

}  // namespace gcsim
