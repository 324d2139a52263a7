// Command-line front end: compile, run, replay, score, perturb, render, serve.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "gcsim/environment.hpp"
#include "gcsim/error.hpp"
#include "gcsim/harness.hpp"
#include "gcsim/lower.hpp"
#include "gcsim/metrics.hpp"
#include "gcsim/perturbation.hpp"
#include "gcsim/raster.hpp"

using namespace gcsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kUsage =
    "usage: gcsim <command> [options]\n"
    "commands:\n"
    "  compile <plan>                     lower a plan to GUI actions\n"
    "  run <plan> --policy P              execute a policy, record a trajectory\n"
    "  replay <trajectory>                re-execute and verify hashes\n"
    "  score <trajectory>                 compute the score report\n"
    "  perturb <plan>                     sensitivity or cascade analysis\n"
    "  render <scene|trajectory>          write raster and vector files\n"
    "  reference <plan>                   write the reference scene\n"
    "  serve <problem>...                 agent protocol over stdio or TCP\n"
    "run 'gcsim <command> --help' for options\n";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

std::string stem_of(const fs::path& p) {
  std::string s = p.filename().string();
  for (const char* ext : {".problem.json", ".plan.json", ".json"}) {
    const std::string e(ext);
    if (s.size() > e.size() && s.compare(s.size() - e.size(), e.size(), e) == 0) return s.substr(0, s.size() - e.size());
  }
  return s;
}

ProblemSpec load_problem_file(const fs::path& p) {
  const std::string raw = read_file(p);
  try {
    return load_problem(raw, stem_of(p));
  } catch (const Error&) {
    // Report every diagnostic, not only the first.
    ParseResult pr = parse_plan(raw);
    if (pr.plans.empty()) {
      try {
        const json j = json::parse(raw);
        if (j.is_object() && j.contains("plan")) pr = parse_plan_json(j["plan"]);
      } catch (const json::exception&) {
      }
    }
    std::vector<Diagnostic> diags = pr.diagnostics;
    if (diags.empty() && !pr.plans.empty()) diags = validate_dependencies(pr.plans.front());
    for (const Diagnostic& d : diags) std::cerr << to_string(d.code) << " task " << d.task_index << ": " << d.message << "\n";
    throw;
  }
}

RunConfig load_config(const std::string& path) {
  RunConfig c = path.empty() ? RunConfig{} : RunConfig::load(path);
  c.apply_environment();
  return c;
}

ScreenshotMode parse_mode(const std::string& s) {
  if (s == "none") return ScreenshotMode::None;
  if (s == "hash") return ScreenshotMode::Hash;
  if (s == "files") return ScreenshotMode::Files;
  throw Error(ErrorCode::BadConfig, "screenshots must be none, hash or files");
}

bool is_trajectory(const fs::path& p) { return p.extension() == ".jsonl"; }

int cmd_compile(const std::string& plan, const std::string& out) {
  const ProblemSpec prob = load_problem_file(plan);
  const Viewport v = prob.effective_viewport();
  const LoweredProgram prog = lower(*prob.plan, ToolPalette::standard(), v);
  write_text(out, prog.to_json().dump(2));
  return 0;
}

int cmd_reference(const std::string& plan, const std::string& out) {
  const ProblemSpec prob = load_problem_file(plan);
  write_text(out, build_reference(*prob.plan, prob.effective_viewport()).scene.to_json().dump(2));
  return 0;
}

int cmd_run(const std::string& plan, const std::string& policy_text, RunConfig cfg, const std::string& out_dir,
            const std::string& shots, int budget) {
  const ProblemSpec prob = load_problem_file(plan);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (!shots.empty()) cfg.env.screenshots = parse_mode(shots);
  if (budget > 0) cfg.env.step_budget = budget;
  PolicySpec spec = PolicySpec::parse(policy_text);
  auto policy = make_policy(spec, prob, prob.effective_viewport(cfg.env.viewport));
  Trajectory t;
  const fs::path path = run_and_record(prob, *policy, cfg, &t);
  int failures = 0;
  for (const StepRecord& r : t.steps) failures += !r.exe_success;
  std::cout << path.string() << "\n"
            << t.steps.size() << " steps, " << failures << " failed" << (t.truncated ? ", truncated: " + t.truncation_reason : "")
            << "\n";
  return 0;
}

int cmd_replay(const std::string& path) {
  const ReplayReport rep = replay_file(path);
  if (rep.ok) {
    std::cout << "ok: every state hash reproduced\n";
    return 0;
  }
  std::cerr << "HASH_MISMATCH";
  if (rep.first_mismatch >= 0) std::cerr << " at step " << rep.first_mismatch;
  std::cerr << "\n";
  for (const std::string& p : rep.problems) std::cerr << "  " << p << "\n";
  return 1;
}

int cmd_score(const std::string& path, const std::string& reference, const std::string& gt_path, std::string judge_path,
              const RunConfig& cfg, const std::string& format, const std::string& out) {
  const Trajectory t = read_trajectory(path);
  Scene ref;
  if (!reference.empty()) {
    const json j = json::parse(read_file(reference));
    ref = Scene::from_json(j.contains("reference_construction") ? j.at("reference_construction") : j);
  } else if (t.plan) {
    ref = build_reference(*t.plan, t.config.viewport).scene;
  } else {
    throw Error(ErrorCode::EmptyReference, "no --reference given and the trajectory carries no plan");
  }
  std::optional<GroundTruth> gt;
  if (!gt_path.empty()) gt = GroundTruth::from_trajectory(read_trajectory(gt_path));
  if (judge_path.empty() && cfg.judge_file) judge_path = cfg.judge_file->string();
  std::optional<JudgeFile> judge;
  if (!judge_path.empty()) judge = JudgeFile::load(judge_path);
  const ScoreReport r = score_trajectory(t, ref, gt, cfg.reward, judge ? &*judge : nullptr);
  write_text(out, format == "table" ? r.table() : r.to_json().dump(2));
  return 0;
}

int cmd_perturb(const std::string& plan, double sigma, int seeds, std::uint64_t seed, int task, double h,
                const std::string& format, const std::string& out) {
  const ProblemSpec prob = load_problem_file(plan);
  const Viewport v = prob.effective_viewport();
  if (task >= 0) {
    const SensitivityReport r = finite_diff_sensitivity(*prob.plan, task, v, h);
    if (format == "table") {
      std::string text = "task " + std::to_string(task) + " amplification " + std::to_string(r.amplification) + "\n";
      for (const ObjectBlock& b : r.downstream) text += "  " + b.label + " gain " + std::to_string(b.gain) + "\n";
      write_text(out, text);
    } else {
      write_text(out, r.to_json().dump(2));
    }
    return 0;
  }
  const CascadeReport r = cascade_report(*prob.plan, sigma, seeds, seed, v);
  write_text(out, format == "table" ? r.table() : r.to_json().dump(2));
  return 0;
}

int cmd_render(const std::string& input, const std::string& out) {
  Scene scene;
  if (is_trajectory(input)) {
    scene = read_trajectory(input).final_scene;
  } else {
    const json j = json::parse(read_file(input));
    if (j.contains("objects")) {
      scene = Scene::from_json(j);
    } else {
      const ProblemSpec prob = problem_from_json(j, stem_of(input));
      if (prob.reference_construction) {
        scene = *prob.reference_construction;
      } else if (prob.plan) {
        scene = build_reference(*prob.plan, prob.effective_viewport()).scene;
      } else {
        throw Error(ErrorCode::MalformedSpec, "nothing to render in " + input);
      }
    }
  }
  const fs::path png = out.empty() ? fs::path(stem_of(input) + ".png") : fs::path(out);
  const Rendering r = render(scene);
  write_png(r.raster, png);
  fs::path vec = png;
  vec.replace_extension(".vector.json");
  write_text(vec.string(), r.vector.dump(2));
  std::cout << png.string() << " sha256 " << r.raster.hash() << "\n" << vec.string() << "\n";
  return 0;
}

int cmd_serve(const std::vector<std::string>& files, const RunConfig& cfg, bool use_tcp, int port, bool once) {
  std::vector<ProblemSpec> problems;
  for (const std::string& f : files) problems.push_back(load_problem_file(f));
  if (!use_tcp) {
    FdChannel ch(0, 1);
    serve_session(problems, ch, cfg);
    return 0;
  }
  if (port < 0) {
    const char* env = std::getenv("GCSIM_PORT");
    port = env != nullptr ? std::atoi(env) : 0;
  }
  TcpListener listener(port);
  std::cerr << "listening on 127.0.0.1:" << listener.port() << std::endl;
  for (;;) {
    std::shared_ptr<FdChannel> ch = listener.accept();
    if (once) {
      serve_session(problems, *ch, cfg);
      return 0;
    }
    std::thread([problems, cfg, ch] {
      try {
        serve_session(problems, *ch, cfg);
      } catch (const std::exception& e) {
        std::cerr << "session ended: " << e.what() << "\n";
      }
    }).detach();
  }
}

}  // namespace

int main(int argc, char** argv) {
  static const std::vector<std::string> kCommands{"compile", "run", "replay", "score", "perturb", "render", "reference", "serve"};
  if (argc < 2 || std::find(kCommands.begin(), kCommands.end(), argv[1]) == kCommands.end()) {
    const bool help = argc >= 2 && (std::string(argv[1]) == "--help" || std::string(argv[1]) == "-h");
    (help ? std::cout : std::cerr) << kUsage;
    return help ? 0 : 2;
  }

  CLI::App app{"geometric construction GUI simulator"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);

  std::string input, out, policy = "oracle", out_dir, shots, reference, gt, judge_file, format = "json";
  std::vector<std::string> inputs;
  int budget = 0, seeds = 100, task = -1, port = -1;
  double sigma = 5.0, h = kDefaultFiniteDifferenceStep;
  std::uint64_t seed = 1;
  bool tcp = false, once = false;

  auto* compile = app.add_subcommand("compile", "lower a plan to a LoweredProgram");
  compile->add_option("plan", input)->required();
  compile->add_option("-o,--output", out);

  auto* refcmd = app.add_subcommand("reference", "apply a plan directly and write the scene");
  refcmd->add_option("plan", input)->required();
  refcmd->add_option("-o,--output", out);

  auto* run = app.add_subcommand("run", "execute a policy and record the trajectory");
  run->add_option("plan", input)->required();
  run->add_option("--policy", policy, "oracle | noisy:<sigma>:<seed> | external:<host>:<port>");
  run->add_option("-o,--output-dir", out_dir);
  run->add_option("--screenshots", shots, "none | hash | files");
  run->add_option("--step-budget", budget);

  auto* rep = app.add_subcommand("replay", "verify a recorded trajectory");
  rep->add_option("trajectory", input)->required();

  auto* sc = app.add_subcommand("score", "score a trajectory");
  sc->add_option("trajectory", input)->required();
  sc->add_option("--reference", reference, "reference scene (or problem with reference_construction)");
  sc->add_option("--gt", gt, "ground-truth trajectory; default: the plan's lowering");
  sc->add_option("--judge-file", judge_file, "external judge scores keyed by problem id");
  sc->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));
  sc->add_option("-o,--output", out);

  auto* pert = app.add_subcommand("perturb", "finite-difference sensitivity or Monte-Carlo cascade");
  pert->add_option("plan", input)->required();
  pert->add_option("--sigma", sigma, "paint noise in pixels");
  pert->add_option("--seeds", seeds);
  pert->add_option("--seed", seed);
  pert->add_option("--task", task, "sensitivity of this task instead of a cascade");
  pert->add_option("--step", h, "finite-difference step (world units)");
  pert->add_option("--format", format)->check(CLI::IsMember({"json", "table"}));
  pert->add_option("-o,--output", out);

  auto* ren = app.add_subcommand("render", "rasterize a scene, problem or trajectory");
  ren->add_option("input", input)->required();
  ren->add_option("-o,--output", out, "PNG path; the vector file goes next to it");

  auto* srv = app.add_subcommand("serve", "run problems against an agent over the line protocol");
  srv->add_option("problems", inputs)->required();
  srv->add_flag("--tcp", tcp, "listen on TCP instead of stdio");
  srv->add_option("--port", port, "TCP port (default: GCSIM_PORT or any free port)");
  srv->add_flag("--once", once, "exit after the first connection");
  srv->add_option("-o,--output-dir", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (*compile) return cmd_compile(input, out);
    if (*refcmd) return cmd_reference(input, out);
    if (*run) return cmd_run(input, policy, cfg, out_dir, shots, budget);
    if (*rep) return cmd_replay(input);
    if (*sc) return cmd_score(input, reference, gt, judge_file, cfg, format, out);
    if (*pert) return cmd_perturb(input, sigma, seeds, seed, task, h, format, out);
    if (*ren) return cmd_render(input, out);
    if (*srv) {
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      return cmd_serve(inputs, cfg, tcp, port, once);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
