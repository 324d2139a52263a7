#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcsim/plan.hpp"

namespace gcsim::testing {

inline std::filesystem::path corpus_dir() { return GCSIM_CORPUS_DIR; }

/// Top-level problem files only; references live in a subdirectory.
inline std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_dir())) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ProblemSpec load_corpus_problem(const std::filesystem::path& p) {
  return load_problem(slurp(p), p.stem().string());
}

inline ProblemSpec problem_from(std::string_view raw, std::string_view id = "t") { return load_problem(raw, id); }

/// Parsed but not dependency-checked, so invalid plans can be inspected.
inline TaskPlan plan_from(std::string_view tasks_json) {
  ParseResult r = parse_plan(std::string(R"({"description":"t","grade_level":"Grade 8","drawing_difficulty":"Beginner","skills":[],"tasks":)") +
                             std::string(tasks_json) + "}");
  if (r.plans.empty()) throw std::runtime_error("unparseable test plan");
  return r.plans.front();
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("gcsim_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

inline const char* kExampleSquare = R"([
  {
    "description": "Construct a square with side length 2",
    "grade_level": "Grade 7",
    "drawing_difficulty": "Beginner",
    "skills": ["Basic object construction", "Numerical and metric constraints", "Natural language to tool mapping ability"],
    "tasks": [{"function": "draw_polygon", "args": {"points": [[0,0], [2,0], [2,2], [0,2]]}}]
  }
])";

inline const char* kExampleBisector = R"([
  {
    "description": "Construct a triangle and its angle bisector labeled L1",
    "grade_level": "Grade 8",
    "drawing_difficulty": "Intermediate",
    "skills": ["Basic object construction", "Geometric relations and constraints"],
    "tasks": [
      {"function": "draw_polygon", "args": {"points": [[-1,0], [3,0], [1,3]]}},
      {"function": "angle_bisector", "args": {"points": [[3,0], [-1,0], [1,3]]}},
      {"function": "add_text_label", "args": {"position": [0.5,1], "text": "L1"}}
    ]
  }
])";

inline const char* kMidpointChain = R"([
  {"function":"draw_point","args":{"points":[[-3,-1]]}},
  {"function":"draw_point","args":{"points":[[3,1]]}},
  {"function":"midpoint_or_center","args":{"points":[[-3,-1],[3,1]]}},
  {"function":"midpoint_or_center","args":{"points":[[0,0],[3,1]]}}
])";

}  // namespace gcsim::testing
