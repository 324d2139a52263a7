#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "gcsim/environment.hpp"
#include "gcsim/lower.hpp"

namespace gcsim {

/// Replays a fixed action list, then signals done.
class OraclePolicy : public Policy {
 public:
  explicit OraclePolicy(std::vector<Action> actions) : actions_(std::move(actions)) {}
  /// Throws Error(NoPlan) when the problem has no plan.
  static OraclePolicy for_problem(const ProblemSpec& problem, const Viewport& viewport);

  std::optional<Action> next(const Observation&) override {
    if (i_ >= actions_.size()) return std::nullopt;
    return actions_[i_++];
  }
  const std::vector<Action>& actions() const { return actions_; }

 private:
  std::vector<Action> actions_;
  std::size_t i_ = 0;
};

/// Adds i.i.d. Gaussian pixel noise (standard deviation `sigma_px` per axis)
/// to the paints of `program`. One normal pair is drawn per paint whether or
/// not it is applied, so restricting `only_task` keeps the other draws
/// aligned. A polygon's closing paint repeats its noisy first vertex.
std::vector<Action> noisy_actions(const LoweredProgram& program, const Viewport& viewport, double sigma_px,
                                  std::mt19937_64& rng, std::optional<int> only_task = std::nullopt);

/// Oracle with seeded paint noise.
OraclePolicy noisy_oracle(const ProblemSpec& problem, const Viewport& viewport, double sigma_px, std::uint64_t seed);

}  // namespace gcsim
