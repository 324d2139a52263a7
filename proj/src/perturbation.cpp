#include "gcsim/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "gcsim/environment.hpp"
#include "gcsim/error.hpp"
#include "gcsim/lower.hpp"
#include "gcsim/policy.hpp"

namespace gcsim {

using nlohmann::json;

namespace {

std::vector<int> task_of_object(const ReferenceConstruction& ref) {
  std::vector<int> owner(ref.scene.size(), -1);
  for (std::size_t t = 0; t < ref.tasks.size(); ++t) {
    for (ObjectId id : ref.tasks[t].created) owner[static_cast<std::size_t>(id)] = static_cast<int>(t);
  }
  return owner;
}

bool same_structure(const Scene& a, const Scene& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const GeoObject& x = a.objects()[i];
    const GeoObject& y = b.objects()[i];
    if (x.variant != y.variant || anchors(x).size() != anchors(y).size()) return false;
  }
  return true;
}

double displacement(const GeoObject& a, const GeoObject& b) {
  const auto pa = anchors(a), pb = anchors(b);
  if (pa.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < pa.size(); ++k) s += distance(pa[k], pb[k]);
  return s / static_cast<double>(pa.size());
}

json object_json(const ObjectDisplacement& o) {
  return json{{"id", o.id}, {"label", o.label}, {"variant", to_string(o.variant)}, {"task_index", o.task_index}, {"mean", o.mean}, {"max", o.max}};
}

std::string fixed(double v, int prec = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

}  // namespace

double Matrix::max_column_norm() const {
  double best = 0.0;
  for (int c = 0; c < cols; ++c) {
    double s = 0.0;
    for (int r = 0; r < rows; ++r) s += (*this)(r, c) * (*this)(r, c);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

json Matrix::to_json() const {
  json rows_json = json::array();
  for (int r = 0; r < rows; ++r) {
    json row = json::array();
    for (int c = 0; c < cols; ++c) row.push_back((*this)(r, c));
    rows_json.push_back(std::move(row));
  }
  return rows_json;
}

const ObjectBlock* SensitivityReport::downstream_object(std::string_view label) const {
  for (const ObjectBlock& b : downstream) {
    if (b.label == label) return &b;
  }
  return nullptr;
}

Matrix SensitivityReport::anchor_block(const ObjectBlock& block, int anchor) const {
  Matrix m(2, j_est.cols);
  for (int c = 0; c < j_est.cols; ++c) {
    m(0, c) = j_est(block.first_row + 2 * anchor, c);
    m(1, c) = j_est(block.first_row + 2 * anchor + 1, c);
  }
  return m;
}

json SensitivityReport::to_json() const {
  const auto blocks = [](const std::vector<ObjectBlock>& bs) {
    json out = json::array();
    for (const ObjectBlock& b : bs) {
      out.push_back(json{{"id", b.id}, {"label", b.label}, {"variant", to_string(b.variant)}, {"task_index", b.task_index},
                         {"first_row", b.first_row}, {"anchors", b.anchor_count}, {"gain", b.gain}});
    }
    return out;
  };
  return json{{"task_index", task_index}, {"h", h}, {"columns", columns}, {"column_status", column_status},
              {"B_est", b_est.to_json()}, {"J_est", j_est.to_json()}, {"own", blocks(own)},
              {"downstream", blocks(downstream)}, {"amplification", amplification}};
}

SensitivityReport finite_diff_sensitivity(const TaskPlan& plan, int task_index, const Viewport& viewport, double h) {
  if (task_index < 0 || task_index >= static_cast<int>(plan.tasks.size())) {
    throw Error(ErrorCode::OutOfRange, "task index " + std::to_string(task_index) + " outside the plan");
  }
  if (!(h > 0.0)) throw Error(ErrorCode::BadConfig, "finite-difference step must be > 0");
  const ReferenceConstruction base = build_reference(plan, viewport);
  const std::vector<int> owner = task_of_object(base);

  SensitivityReport rep;
  rep.task_index = task_index;
  rep.h = h;
  int own_rows = 0, down_rows = 0;
  for (const GeoObject& o : base.scene.objects()) {
    const int t = owner[static_cast<std::size_t>(o.id)];
    const int n = static_cast<int>(anchors(o).size());
    ObjectBlock b{o.id, o.label, o.variant, t, 0, n, 0.0};
    if (t == task_index) {
      b.first_row = own_rows;
      own_rows += 2 * n;
      rep.own.push_back(b);
    } else if (t > task_index) {
      b.first_row = down_rows;
      down_rows += 2 * n;
      rep.downstream.push_back(b);
    }
  }
  const Task& task = plan.tasks[static_cast<std::size_t>(task_index)];
  const int cols = 2 * static_cast<int>(task.points.size());
  rep.b_est = Matrix(own_rows, cols);
  rep.j_est = Matrix(down_rows, cols);

  for (int c = 0; c < cols; ++c) {
    const int k = c / 2;
    const bool y_axis = c % 2 == 1;
    rep.columns.push_back("p" + std::to_string(k) + (y_axis ? ".y" : ".x"));
    const auto build = [&](double sign) -> std::optional<Scene> {
      BuildOptions opt;
      Vec2 p = task.points[static_cast<std::size_t>(k)];
      (y_axis ? p.y : p.x) += sign * h;
      opt.overrides[{task_index, k}] = p;
      try {
        Scene s = build_reference(plan, viewport, opt).scene;
        if (!same_structure(s, base.scene)) return std::nullopt;
        return s;
      } catch (const Error&) {
        return std::nullopt;
      }
    };
    const auto plus = build(+1.0), minus = build(-1.0);
    if (!plus || !minus) {
      rep.column_status.push_back("DEGENERATE_AFTER_PERTURBATION");
      continue;
    }
    rep.column_status.push_back("ok");
    const auto fill = [&](std::vector<ObjectBlock>& blocks, Matrix& m) {
      for (ObjectBlock& b : blocks) {
        const auto ap = anchors(plus->at(b.id)), am = anchors(minus->at(b.id));
        for (int a = 0; a < b.anchor_count; ++a) {
          const Vec2 d = (1.0 / (2.0 * h)) * (ap[static_cast<std::size_t>(a)] - am[static_cast<std::size_t>(a)]);
          m(b.first_row + 2 * a, c) = d.x;
          m(b.first_row + 2 * a + 1, c) = d.y;
          b.gain = std::max(b.gain, norm(d));
        }
      }
    };
    fill(rep.own, rep.b_est);
    fill(rep.downstream, rep.j_est);
  }
  rep.amplification = rep.j_est.max_column_norm();
  return rep;
}

const ObjectDisplacement* CascadeReport::object(std::string_view label) const {
  for (const ObjectDisplacement& o : objects) {
    if (o.label == label) return &o;
  }
  return nullptr;
}

const SourceCascade* CascadeReport::source(int task_index) const {
  for (const SourceCascade& s : sources) {
    if (s.task_index == task_index) return &s;
  }
  return nullptr;
}

CascadeReport cascade_report(const TaskPlan& plan, double sigma_px, int seeds, std::uint64_t seed, const Viewport& viewport) {
  if (!(sigma_px >= 0.0)) throw Error(ErrorCode::BadConfig, "sigma must be >= 0");
  if (seeds < 1) throw Error(ErrorCode::BadConfig, "seeds must be >= 1");
  const ReferenceConstruction ref = build_reference(plan, viewport);
  const std::vector<int> owner = task_of_object(ref);
  const LoweredProgram prog = lower(plan, ToolPalette::standard(), viewport);

  ProblemSpec problem;
  problem.id = "cascade";
  problem.viewport = viewport;
  EnvConfig cfg;
  cfg.viewport = viewport;
  cfg.screenshots = ScreenshotMode::None;

  std::vector<int> sources;
  for (const ActionGroup& g : prog.groups) {
    for (const Action& a : g.actions) {
      if (a.kind == ActionKind::Paint) {
        sources.push_back(g.task_index);
        break;
      }
    }
  }

  const std::size_t n_obj = ref.scene.size();
  // pass 0: all paints noisy; pass 1 + i: only sources[i].
  const std::size_t passes = 1 + sources.size();
  std::vector<std::vector<double>> sum(passes, std::vector<double>(n_obj, 0.0)), mx = sum;
  std::vector<int> ok_runs(passes, 0), failed(passes, 0);

  for (int s = 0; s < seeds; ++s) {
    for (std::size_t p = 0; p < passes; ++p) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(s)};
      std::mt19937_64 rng(seq);
      const std::optional<int> only = p == 0 ? std::nullopt : std::optional<int>(sources[p - 1]);
      const std::vector<Action> actions = noisy_actions(prog, viewport, sigma_px, rng, only);
      const Trajectory t = run_actions(problem, actions, cfg);
      if (!same_structure(t.final_scene, ref.scene)) {
        ++failed[p];
        continue;
      }
      ++ok_runs[p];
      for (std::size_t i = 0; i < n_obj; ++i) {
        const double d = displacement(ref.scene.objects()[i], t.final_scene.objects()[i]);
        sum[p][i] += d;
        mx[p][i] = std::max(mx[p][i], d);
      }
    }
  }

  const auto displacements = [&](std::size_t p) {
    std::vector<ObjectDisplacement> out;
    for (std::size_t i = 0; i < n_obj; ++i) {
      const GeoObject& o = ref.scene.objects()[i];
      out.push_back(ObjectDisplacement{o.id, o.label, o.variant, owner[i], ok_runs[p] > 0 ? sum[p][i] / ok_runs[p] : 0.0, mx[p][i]});
    }
    return out;
  };

  CascadeReport rep;
  rep.sigma_px = sigma_px;
  rep.seeds = seeds;
  rep.seed = seed;
  rep.objects = displacements(0);
  rep.failed_runs = failed[0];
  for (std::size_t i = 0; i < sources.size(); ++i) {
    SourceCascade sc;
    sc.task_index = sources[i];
    sc.objects = displacements(i + 1);
    sc.failed_runs = failed[i + 1];
    double own = 0.0, down = 0.0;
    int n_own = 0, n_down = 0;
    for (const ObjectDisplacement& o : sc.objects) {
      if (o.task_index == sc.task_index) {
        own += o.mean;
        ++n_own;
      } else if (o.task_index > sc.task_index) {
        down += o.mean;
        ++n_down;
      }
    }
    sc.source_mean = n_own > 0 ? own / n_own : 0.0;
    sc.downstream_mean = n_down > 0 ? down / n_down : 0.0;
    sc.amplification = sc.source_mean > 0.0 ? sc.downstream_mean / sc.source_mean : 0.0;
    rep.sources.push_back(std::move(sc));
  }
  std::stable_sort(rep.sources.begin(), rep.sources.end(),
                   [](const SourceCascade& a, const SourceCascade& b) { return a.amplification > b.amplification; });
  return rep;
}

json CascadeReport::to_json() const {
  json objs = json::array();
  for (const ObjectDisplacement& o : objects) objs.push_back(object_json(o));
  json srcs = json::array();
  for (const SourceCascade& s : sources) {
    json so = json::array();
    for (const ObjectDisplacement& o : s.objects) so.push_back(object_json(o));
    srcs.push_back(json{{"task_index", s.task_index}, {"source_mean", s.source_mean}, {"downstream_mean", s.downstream_mean},
                        {"amplification", s.amplification}, {"failed_runs", s.failed_runs}, {"objects", std::move(so)}});
  }
  return json{{"sigma_px", sigma_px}, {"seeds", seeds}, {"seed", seed}, {"failed_runs", failed_runs},
              {"objects", std::move(objs)}, {"sources", std::move(srcs)}};
}

std::string CascadeReport::table() const {
  std::string out = "sigma " + fixed(sigma_px, 2) + " px, " + std::to_string(seeds) + " seeds, " +
                    std::to_string(failed_runs) + " structural failures\n";
  out += "rank  task  source_mean  downstream_mean  amplification\n";
  int rank = 1;
  for (const SourceCascade& s : sources) {
    char line[160];
    std::snprintf(line, sizeof line, "%4d  %4d  %11.6f  %15.6f  %13.4f\n", rank++, s.task_index, s.source_mean, s.downstream_mean,
                  s.amplification);
    out += line;
  }
  out += "object  task  mean  max\n";
  for (const ObjectDisplacement& o : objects) {
    out += o.label + "  " + std::to_string(o.task_index) + "  " + fixed(o.mean) + "  " + fixed(o.max) + "\n";
  }
  return out;
}

}  // namespace gcsim
