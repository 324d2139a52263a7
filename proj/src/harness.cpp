#include "gcsim/harness.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <openssl/evp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <csignal>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>

#include "gcsim/error.hpp"
#include "gcsim/lower.hpp"
#include "gcsim/policy.hpp"

namespace gcsim {

using nlohmann::json;

void RunConfig::validate() const {
  env.validate();
  reward.validate();
  if (!(sigma_px >= 0.0)) throw Error(ErrorCode::BadConfig, "sigma must be >= 0");
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  if (!j.is_object()) throw Error(ErrorCode::BadConfig, "config must be a JSON object");
  try {
    c.env = EnvConfig::from_json(j);
    if (j.contains("reward")) c.reward = RewardParams::from_json(j.at("reward"));
    if (j.contains("noise")) {
      c.sigma_px = j.at("noise").value("sigma_px", 0.0);
      c.seed = j.at("noise").value("seed", std::uint64_t{0});
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("judge_file")) c.judge_file = j.at("judge_file").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadConfig, "cannot read config " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("config: ") + e.what());
  }
}

void RunConfig::apply_environment() {
  if (const char* dir = std::getenv("GCSIM_OUTPUT_DIR"); dir != nullptr && *dir != '\0') output_dir = dir;
}

PolicySpec PolicySpec::parse(std::string_view text) {
  PolicySpec p;
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  try {
    if (parts[0] == "oracle" && parts.size() == 1) return p;
    if ((parts[0] == "noisy" || parts[0] == "noisy-oracle") && parts.size() == 3) {
      p.kind = Kind::NoisyOracle;
      p.sigma_px = std::stod(parts[1]);
      p.seed = std::stoull(parts[2]);
      if (!(p.sigma_px >= 0.0)) throw Error(ErrorCode::BadConfig, "noise sigma must be >= 0");
      return p;
    }
    if (parts[0] == "external" && parts.size() == 3) {
      p.kind = Kind::External;
      p.host = parts[1];
      p.port = std::stoi(parts[2]);
      return p;
    }
  } catch (const std::logic_error&) {
  }
  throw Error(ErrorCode::BadConfig, "bad policy '" + std::string(text) + "' (oracle | noisy:<sigma>:<seed> | external:<host>:<port>)");
}

FdChannel::FdChannel(int in_fd, int out_fd, bool owns) : in_(in_fd), out_(out_fd), owns_(owns) {
  // A vanished peer should surface as EPIPE, not kill the process.
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

FdChannel::~FdChannel() {
  if (!owns_) return;
  ::close(in_);
  if (out_ != in_) ::close(out_);
}

bool FdChannel::read_line(std::string& line) {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    if (eof_) {
      if (buffer_.empty()) return false;
      line = std::move(buffer_);
      buffer_.clear();
      return true;
    }
    char chunk[4096];
    const ssize_t n = ::read(in_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      eof_ = true;
      continue;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void FdChannel::write_line(const std::string& line) {
  std::string data = line;
  data += '\n';
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(out_, data.data() + off, data.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::TransportClosed, "write failed: " + std::string(std::strerror(errno)));
    off += static_cast<std::size_t>(n);
  }
}

std::unique_ptr<FdChannel> connect_tcp(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || res == nullptr) {
    throw Error(ErrorCode::ProviderUnavailable, "cannot resolve " + host);
  }
  int fd = -1;
  for (addrinfo* a = res; a != nullptr; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(ErrorCode::ProviderUnavailable, "cannot connect to " + host + ":" + std::to_string(port));
  return std::make_unique<FdChannel>(fd, fd, true);
}

TcpListener::TcpListener(int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Error(ErrorCode::Io, "socket: " + std::string(std::strerror(errno)));
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 8) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd_);
    throw Error(ErrorCode::Io, "cannot listen on port " + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<FdChannel> TcpListener::accept() {
  for (;;) {
    const int c = ::accept(fd_, nullptr, nullptr);
    if (c >= 0) return std::make_unique<FdChannel>(c, c, true);
    if (errno != EINTR) throw Error(ErrorCode::Io, "accept: " + std::string(std::strerror(errno)));
  }
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(ErrorCode::MalformedSpec, "bad base64 length");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::MalformedSpec, "bad base64 text");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

json observation_message(const Observation& obs) {
  json prev = json::array();
  for (const Action& a : obs.previous_actions) prev.push_back(a.to_json());
  json o{{"present_task", obs.present_task}, {"previous_actions", std::move(prev)}, {"step_index", obs.step_index}};
  o["raster_b64"] = obs.raster != nullptr ? base64_encode(encode_png(*obs.raster)) : std::string();
  return json{{"observation", std::move(o)}};
}

std::optional<Action> ProtocolPolicy::next(const Observation& obs) {
  channel_.write_line(observation_message(obs).dump());
  std::string line;
  for (;;) {
    if (!channel_.read_line(line)) throw Error(ErrorCode::TransportClosed, "client closed the session");
    std::string problem;
    try {
      const json msg = json::parse(line);
      if (msg.is_object() && msg.contains("done") && msg.at("done") == true) return std::nullopt;
      if (msg.is_object() && msg.contains("action")) {
        const Action a = Action::from_json(msg.at("action"));
        if (a.kind == ActionKind::Type && a.text.empty()) {
          problem = "type actions need non-empty text";
        } else {
          return a;
        }
      } else {
        problem = "expected {\"action\": ...} or {\"done\": true}";
      }
    } catch (const json::exception& e) {
      problem = std::string("malformed JSON: ") + e.what();
    } catch (const Error& e) {
      problem = e.what();
    }
    ++errors_;
    channel_.write_line(json{{"error", problem}}.dump());
  }
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const ProblemSpec& problem, const Viewport& viewport) {
  switch (spec.kind) {
    case PolicySpec::Kind::Oracle:
      return std::make_unique<OraclePolicy>(OraclePolicy::for_problem(problem, viewport));
    case PolicySpec::Kind::NoisyOracle:
      return std::make_unique<OraclePolicy>(noisy_oracle(problem, viewport, spec.sigma_px, spec.seed));
    case PolicySpec::Kind::External:
      return std::make_unique<ExternalPolicy>(connect_tcp(spec.host, spec.port));
  }
  throw Error(ErrorCode::BadConfig, "unknown policy kind");
}

std::optional<Scene> reference_scene(const ProblemSpec& problem, const Viewport& viewport) {
  if (problem.reference_construction) return problem.reference_construction;
  if (problem.plan) return build_reference(*problem.plan, problem.effective_viewport(viewport)).scene;
  return std::nullopt;
}

std::filesystem::path run_and_record(const ProblemSpec& problem, Policy& policy, const RunConfig& config, Trajectory* out) {
  std::filesystem::create_directories(config.output_dir);
  EnvConfig env = config.env;
  env.output_dir = config.output_dir;
  env.screenshot_prefix = problem.id;
  Trajectory t = run_policy(problem, policy, env);
  const auto path = config.output_dir / (problem.id + ".jsonl");
  write_trajectory(t, path);
  if (out != nullptr) *out = std::move(t);
  return path;
}

ScoreReport score_trajectory(const Trajectory& traj, const Scene& reference, const std::optional<GroundTruth>& gt,
                             const RewardParams& params, const JudgeFile* judge) {
  GroundTruth truth;
  if (gt) {
    truth = *gt;
  } else if (traj.plan) {
    truth = GroundTruth::from_plan(*traj.plan, traj.config.viewport);
  } else {
    throw Error(ErrorCode::NoPlan, "no ground-truth actions: the trajectory has no plan and no --gt was given");
  }
  const std::vector<Action> pred = traj.actions();
  ScoreReport r = score(traj.problem_id, pred, truth, traj.final_scene, reference, judge);
  if (traj.plan && !traj.steps.empty()) r.reward = trajectory_reward(traj, reference, params);
  return r;
}

void serve_session(const std::vector<ProblemSpec>& problems, LineChannel& channel, const RunConfig& config) {
  const JudgeFile judge = config.judge_file ? JudgeFile::load(*config.judge_file) : JudgeFile();
  for (const ProblemSpec& problem : problems) {
    ProtocolPolicy policy(channel);
    Trajectory t;
    const auto path = run_and_record(problem, policy, config, &t);
    json result{{"problem_id", problem.id}, {"trajectory", path.string()}, {"steps", t.steps.size()},
                {"truncated", t.truncated}, {"errors", policy.errors()}};
    if (t.truncated && t.truncation_reason == "TRANSPORT_CLOSED") return;
    if (const auto ref = reference_scene(problem, config.env.viewport); ref && !t.steps.empty()) {
      try {
        result["score"] = score_trajectory(t, *ref, std::nullopt, config.reward, config.judge_file ? &judge : nullptr).to_json();
      } catch (const Error& e) {
        result["score_error"] = e.what();
      }
    }
    channel.write_line(json{{"result", std::move(result)}}.dump());
  }
  channel.write_line(json{{"session_end", true}}.dump());
}

int drive_with_actions(LineChannel& channel, const std::vector<std::vector<Action>>& per_problem) {
  std::size_t problem = 0, k = 0;
  int errors = 0;
  std::string line;
  while (channel.read_line(line)) {
    const json msg = json::parse(line);
    if (msg.contains("session_end")) break;
    if (msg.contains("result")) {
      ++problem;
      k = 0;
      continue;
    }
    if (msg.contains("error")) ++errors;
    if (!msg.contains("observation") && !msg.contains("error")) continue;
    if (problem < per_problem.size() && k < per_problem[problem].size()) {
      channel.write_line(json{{"action", per_problem[problem][k++].to_json()}}.dump());
    } else {
      channel.write_line(R"({"done":true})");
    }
  }
  return errors;
}

}  // namespace gcsim
