#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcsim/plan.hpp"

namespace gcsim {

/// Dense row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}
  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double max_column_norm() const;
  nlohmann::json to_json() const;
};

/// Rows of a sensitivity matrix belonging to one object.
struct ObjectBlock {
  ObjectId id = -1;
  std::string label;
  Variant variant = Variant::Point;
  int task_index = -1;
  int first_row = 0;
  int anchor_count = 0;
  /// Largest anchor displacement per unit input displacement over all columns.
  double gain = 0.0;
};

struct SensitivityReport {
  int task_index = 0;
  double h = 0.0;
  std::vector<std::string> columns;        // "p<k>.x" / "p<k>.y"
  std::vector<std::string> column_status;  // "ok" or DEGENERATE_AFTER_PERTURBATION
  Matrix b_est;                            // task's own anchors
  Matrix j_est;                            // anchors of later tasks
  std::vector<ObjectBlock> own;
  std::vector<ObjectBlock> downstream;
  double amplification = 0.0;              // largest column norm of j_est

  const ObjectBlock* downstream_object(std::string_view label) const;
  /// 2x(columns) sub-block of j_est for one anchor of a downstream object.
  Matrix anchor_block(const ObjectBlock& block, int anchor) const;
  nlohmann::json to_json() const;
};

inline constexpr double kDefaultFiniteDifferenceStep = 1e-4;

/// Central differences of every anchor with respect to each input coordinate
/// of task `task_index`, linearized at the unperturbed construction.
SensitivityReport finite_diff_sensitivity(const TaskPlan& plan, int task_index, const Viewport& viewport = {},
                                          double h = kDefaultFiniteDifferenceStep);

struct ObjectDisplacement {
  ObjectId id = -1;
  std::string label;
  Variant variant = Variant::Point;
  int task_index = -1;
  double mean = 0.0;  // world units, over seeds
  double max = 0.0;
};

struct SourceCascade {
  int task_index = 0;
  double source_mean = 0.0;      // mean displacement of the task's own objects
  double downstream_mean = 0.0;  // mean displacement of later objects
  double amplification = 0.0;    // downstream_mean / source_mean
  std::vector<ObjectDisplacement> objects;
  int failed_runs = 0;
};

struct CascadeReport {
  double sigma_px = 0.0;
  int seeds = 0;
  std::uint64_t seed = 0;
  std::vector<ObjectDisplacement> objects;  // every paint noisy
  int failed_runs = 0;                      // runs whose final scene lost the reference structure
  std::vector<SourceCascade> sources;       // noise on one task at a time, ranked by amplification

  const ObjectDisplacement* object(std::string_view label) const;
  const SourceCascade* source(int task_index) const;
  nlohmann::json to_json() const;
  std::string table() const;
};

/// Monte-Carlo execution of the lowered plan with Gaussian pixel noise on
/// paints. Seeds share random streams across the per-source passes.
CascadeReport cascade_report(const TaskPlan& plan, double sigma_px, int seeds, std::uint64_t seed = 1,
                             const Viewport& viewport = {});

}  // namespace gcsim
