#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcsim/environment.hpp"
#include "gcsim/metrics.hpp"
#include "gcsim/reward.hpp"

namespace gcsim {

struct RunConfig {
  EnvConfig env;
  RewardParams reward;
  double sigma_px = 0.0;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";
  std::optional<std::filesystem::path> judge_file;

  /// Throws Error(BadConfig).
  void validate() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  /// GCSIM_OUTPUT_DIR overrides output_dir.
  void apply_environment();
};

struct PolicySpec {
  enum class Kind { Oracle, NoisyOracle, External };
  Kind kind = Kind::Oracle;
  double sigma_px = 0.0;
  std::uint64_t seed = 0;
  std::string host;
  int port = 0;

  /// "oracle", "noisy:<sigma>:<seed>" or "external:<host>:<port>".
  static PolicySpec parse(std::string_view text);
};

/// Newline-delimited message channel.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  /// False at end of stream.
  virtual bool read_line(std::string& line) = 0;
  virtual void write_line(const std::string& line) = 0;
};

/// Blocking channel over a pair of file descriptors; closes owned fds.
class FdChannel final : public LineChannel {
 public:
  FdChannel(int in_fd, int out_fd, bool owns = false);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  bool read_line(std::string& line) override;
  void write_line(const std::string& line) override;

 private:
  int in_, out_;
  bool owns_;
  std::string buffer_;
  bool eof_ = false;
};

/// Throws Error(ProviderUnavailable) when the endpoint cannot be reached.
std::unique_ptr<FdChannel> connect_tcp(const std::string& host, int port);

/// Listening socket on 127.0.0.1 (port 0 picks a free one).
class TcpListener {
 public:
  explicit TcpListener(int port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  int port() const { return port_; }
  std::unique_ptr<FdChannel> accept();

 private:
  int fd_ = -1;
  int port_ = 0;
};

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

nlohmann::json observation_message(const Observation& obs);

/// Environment side of the protocol: each observation goes out, an action
/// (or done) comes back. Malformed replies get an {error} message and the
/// policy keeps waiting. End of stream raises TransportClosed.
class ProtocolPolicy final : public Policy {
 public:
  explicit ProtocolPolicy(LineChannel& channel) : channel_(channel) {}
  std::optional<Action> next(const Observation& obs) override;
  bool wants_raster() const override { return true; }
  int errors() const { return errors_; }

 private:
  LineChannel& channel_;
  int errors_ = 0;
};

/// Owns the transport of an external agent.
class ExternalPolicy final : public Policy {
 public:
  explicit ExternalPolicy(std::unique_ptr<FdChannel> channel) : channel_(std::move(channel)), inner_(*channel_) {}
  std::optional<Action> next(const Observation& obs) override { return inner_.next(obs); }
  bool wants_raster() const override { return true; }

 private:
  std::unique_ptr<FdChannel> channel_;
  ProtocolPolicy inner_;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const ProblemSpec& problem, const Viewport& viewport);

/// The reference scene of a problem: the stored one, else the plan applied directly.
std::optional<Scene> reference_scene(const ProblemSpec& problem, const Viewport& viewport);

/// Runs a problem and writes `<output_dir>/<id>.jsonl` (+ sidecar, rasters).
std::filesystem::path run_and_record(const ProblemSpec& problem, Policy& policy, const RunConfig& config, Trajectory* out = nullptr);

/// Scores a trajectory. `gt` defaults to the lowering of the trajectory's plan;
/// the reward is attached when the plan is available.
ScoreReport score_trajectory(const Trajectory& traj, const Scene& reference, const std::optional<GroundTruth>& gt,
                             const RewardParams& params, const JudgeFile* judge);

/// One session over `channel`: every problem in turn, each followed by a
/// {"result": ...} message; the trajectory is flushed even when the
/// transport closes early.
void serve_session(const std::vector<ProblemSpec>& problems, LineChannel& channel, const RunConfig& config);

/// Client helper: answers observations from a fixed action list, then done.
/// Returns the number of error messages received.
int drive_with_actions(LineChannel& channel, const std::vector<std::vector<Action>>& per_problem);

}  // namespace gcsim
