#pragma once

// Live state stream for an HMI client: newline-delimited JSON over TCP.
// The simulation loop and the socket thread share nothing but two queues.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "json.hpp"
#include "vcsim/harness/report.hpp"
#include "vcsim/harness/scenario.hpp"
#include "vcsim/harness/simulator.hpp"

namespace vcsim::harness {

template <typename T>
class MessageQueue {
 public:
  void push(T v) {
    {
      std::lock_guard lk(m_);
      q_.push_back(std::move(v));
    }
    cv_.notify_one();
  }

  std::optional<T> try_pop() {
    std::lock_guard lk(m_);
    if (q_.empty()) return std::nullopt;
    T v = std::move(q_.front());
    q_.pop_front();
    return v;
  }

  std::optional<T> pop_for(std::chrono::milliseconds timeout) {
    std::unique_lock lk(m_);
    if (!cv_.wait_for(lk, timeout, [&] { return !q_.empty(); })) return std::nullopt;
    T v = std::move(q_.front());
    q_.pop_front();
    return v;
  }

  std::size_t size() const {
    std::lock_guard lk(m_);
    return q_.size();
  }

 private:
  mutable std::mutex m_;
  std::condition_variable cv_;
  std::deque<T> q_;
};

// ---- message encoding ----------------------------------------------------------

inline nlohmann::json command_to_json(const Command& c) {
  return std::visit(
      [](const auto& cmd) -> nlohmann::json {
        using T = std::decay_t<decltype(cmd)>;
        if constexpr (std::is_same_v<T, GripCmd>) return {{"type", "grip"}, {"value", cmd.value}};
        if constexpr (std::is_same_v<T, BrakeCmd>) return {{"type", "brake"}, {"value", cmd.value}};
        if constexpr (std::is_same_v<T, CruiseCmd>) return {{"type", "cruise"}, {"command", to_string(cmd.command)}};
        if constexpr (std::is_same_v<T, ModeCmd>) return {{"type", "mode"}, {"value", to_string(cmd.mode)}};
        if constexpr (std::is_same_v<T, RecordCmd>) return {{"type", "record"}, {"value", cmd.on}};
        if constexpr (std::is_same_v<T, FaultCmd>)
          return {{"type", "fault"}, {"id", mecu::to_string(cmd.id)}, {"active", cmd.active}};
        if constexpr (std::is_same_v<T, NodeSilenceCmd>) {
          static constexpr const char* names[] = {"TPS", "TVA", "HMI"};
          return {{"type", "silence"}, {"node", names[static_cast<std::size_t>(cmd.node)]}, {"value", cmd.silent}};
        }
        if constexpr (std::is_same_v<T, WssGainCmd>)
          return {{"type", "wss_gain"}, {"channel", cmd.channel}, {"value", cmd.gain}};
        if constexpr (std::is_same_v<T, OperatorResetCmd>) return {{"type", "reset"}};
        return {{"type", "disconnect"}};
      },
      c);
}

/// Parses one inbound line. Throws CONFIG_INVALID with a reason on bad input.
inline Command parse_command_message(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("CONFIG_INVALID", std::string("not valid JSON: ") + e.what());
  }
  Command c = detail::parse_command(j, "command");
  const auto canonical = command_to_json(c);
  for (const auto& [k, _] : j.items())
    if (!canonical.contains(k)) throw Error("CONFIG_INVALID", "command." + k + ": unknown field");
  return c;
}

inline nlohmann::json error_message(const std::string& what) { return {{"type", "error"}, {"message", what}}; }

/// One state frame: the measurement record plus HMI status.
inline nlohmann::json frame_json(const MeasurementRecord& r, const Simulator& sim) {
  const auto& fs = sim.failsafe();
  nlohmann::json errors = nlohmann::json::array();
  for (auto id : fs.active.ids()) errors.push_back(mecu::to_string(id));
  nlohmann::json actions = nlohmann::json::array();
  for (auto a : mecu::transition(fs, fs.active).actions) actions.push_back(mecu::to_string(a));
  const double baseline = sim.config().params.eco_baseline_l_per_100km;
  nlohmann::json consumption = nullptr;
  if (r.x_m > 0.0) consumption = powertrain::consumption(r.fuel_ml, r.x_m);
  return {{"type", "frame"},
          {"t", r.t_s},
          {"grip", r.grip},
          {"v_set", r.v_set_kmh},
          {"v_meas", r.v_meas_kmh},
          {"v_true", r.v_true_kmh},
          {"distance", r.x_m},
          {"tva_cmd", r.tva_cmd_pct},
          {"tva_actual", r.tva_actual_pct},
          {"ignition_deg", r.ignition_deg},
          {"engine_rpm", r.engine_rpm},
          {"injection_rate", r.injection_mlps},
          {"fuel_total", r.fuel_ml},
          {"grade", r.grade},
          {"pitch", r.pitch_deg},
          {"mode", to_string(r.mode)},
          {"failsafe_class", r.failsafe_class},
          {"failsafe_errors", errors},
          {"failsafe_actions", actions},
          {"engine_running", sim.powertrain().engine_running},
          {"cruise_state", to_string(r.cruise)},
          {"cruise_target", sim.cruise_target() ? nlohmann::json(*sim.cruise_target()) : nullptr},
          {"recording", sim.recording()},
          {"eco_score", eco_score(r.fuel_ml, r.x_m, baseline)},
          {"consumption_l_per_100km", consumption}};
}

// ---- TCP server ------------------------------------------------------------------

/// Serves one client at a time. Inbound lines become commands; outbound frames
/// are written as they are published. A disconnect enqueues DisconnectCmd.
class StreamServer {
 public:
  explicit StreamServer(std::uint16_t port, std::string bind_addr = "127.0.0.1")
      : requested_port_(port), bind_addr_(std::move(bind_addr)) {}

  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;
  ~StreamServer() { stop(); }

  void start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error("IO_ERROR", std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(requested_port_);
    if (::inet_pton(AF_INET, bind_addr_.c_str(), &addr.sin_addr) != 1)
      throw Error("IO_ERROR", "bad bind address '" + bind_addr_ + "'");
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 1) < 0) {
      const std::string why = std::strerror(errno);
      ::close(listen_fd_);
      listen_fd_ = -1;
      throw Error("IO_ERROR", "cannot listen on port " + std::to_string(requested_port_) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    running_ = true;
    thread_ = std::thread([this] { loop(); });
  }

  void stop() {
    if (!running_.exchange(false)) return;
    if (thread_.joinable()) thread_.join();
    if (listen_fd_ >= 0) ::close(listen_fd_);
    listen_fd_ = -1;
  }

  std::uint16_t port() const { return port_; }
  bool client_connected() const { return client_connected_; }

  /// Outbound: one JSON document per line.
  void publish(const nlohmann::json& frame) { frames_.push(frame.dump()); }

  /// Inbound commands, in arrival order.
  std::optional<Command> next_command() { return commands_.try_pop(); }

 private:
  void loop() {
    int client = -1;
    std::string inbuf;
    while (running_) {
      if (client < 0) {
        pollfd p{listen_fd_, POLLIN, 0};
        // Frames published while nobody listens are dropped.
        while (frames_.try_pop()) {
        }
        if (::poll(&p, 1, 10) > 0 && (p.revents & POLLIN)) {
          client = ::accept(listen_fd_, nullptr, nullptr);
          if (client >= 0) {
            inbuf.clear();
            client_connected_ = true;
          }
        }
        continue;
      }
      pollfd p{client, POLLIN, 0};
      const int ready = ::poll(&p, 1, 2);
      bool drop = false;
      if (ready > 0 && (p.revents & (POLLIN | POLLHUP | POLLERR))) {
        char buf[4096];
        const ssize_t n = ::recv(client, buf, sizeof buf, 0);
        if (n <= 0) {
          drop = true;
        } else {
          inbuf.append(buf, static_cast<std::size_t>(n));
          std::size_t nl;
          while ((nl = inbuf.find('\n')) != std::string::npos) {
            std::string line = inbuf.substr(0, nl);
            inbuf.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            try {
              commands_.push(parse_command_message(line));
            } catch (const Error& e) {
              drop = !send_line(client, error_message(e.what()).dump());
            }
          }
          if (inbuf.size() > kMaxLine) {
            inbuf.clear();
            drop = !send_line(client, error_message("line too long").dump());
          }
        }
      }
      while (!drop) {
        auto f = frames_.try_pop();
        if (!f) break;
        drop = !send_line(client, *f);
      }
      if (drop) {
        ::close(client);
        client = -1;
        client_connected_ = false;
        commands_.push(DisconnectCmd{});
      }
    }
    if (client >= 0) ::close(client);
    client_connected_ = false;
  }

  static bool send_line(int fd, const std::string& s) {
    std::string out = s + "\n";
    const char* p = out.data();
    std::size_t left = out.size();
    while (left > 0) {
      const ssize_t n = ::send(fd, p, left, MSG_NOSIGNAL);
      if (n <= 0) return false;
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    return true;
  }

  static constexpr std::size_t kMaxLine = 64 * 1024;

  std::uint16_t requested_port_;
  std::string bind_addr_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::atomic<bool> client_connected_{false};
  std::thread thread_;
  MessageQueue<std::string> frames_;
  MessageQueue<Command> commands_;
};

struct SessionOptions {
  double realtime_factor = 1.0;  // <= 0 runs as fast as possible
  double duration_s = 0.0;       // 0 = until stop() returns true
};

/// Interactive loop: commands apply on the next tick, one frame per tick.
/// Records taken while recording is on are handed to `on_record`.
inline void run_session(Simulator& sim, StreamServer& server, const SessionOptions& opt,
                        const std::function<bool()>& stop,
                        const std::function<void(const MeasurementRecord&)>& on_record = {}) {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration<double>(sim.config().control_period_s);
  auto next = clock::now();
  for (;;) {
    while (auto c = server.next_command()) sim.push(*c);
    const auto rec = sim.sample();
    server.publish(frame_json(rec, sim));
    if (sim.recording() && on_record) on_record(rec);
    if ((opt.duration_s > 0.0 && rec.t_s >= opt.duration_s - 1e-9) || (stop && stop())) break;
    sim.advance();
    if (opt.realtime_factor > 0.0) {
      next += std::chrono::duration_cast<clock::duration>(period / opt.realtime_factor);
      std::this_thread::sleep_until(next);
    }
  }
}

}  // namespace vcsim::harness
