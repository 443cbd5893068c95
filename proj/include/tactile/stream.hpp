#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tactile/config.hpp"
#include "tactile/mlp.hpp"
#include "tactile/pipeline.hpp"

namespace tactile {

enum class TimeMode {
  Accelerated,  // simulated time follows the "t" field of inbound messages
  RealTime,     // simulated time follows the wall clock; "t" is ignored
};

// One live pipeline driven by newline-delimited JSON messages.
//
// Inbound:  {"press": cell, "pressure_kpa": p, "t": ms}   pressure defaults to 60
//           {"release": cell, "t": ms}
//           {"advance": ms}
// Outbound: {"window": t, "index": i, "codes": [9], "peaks": [9], "max": [9]}  active windows only
//           {"morse": "N"}  null letter for a rejected code, "~" marks a continuous segment
//           {"symbol": "plus", "probs": [4]}  or {"symbol": null, "feature": [9]} without a model
//           {"efficiency": ratio}  after each letter or symbol and at close
//           {"error": message, "line": n}
//
// The sink is called from the analyzer thread and from the caller's thread,
// never concurrently.
class StreamSession {
 public:
  using Sink = std::function<void(const std::string& message)>;

  StreamSession(PipelineConfig cfg, TimeMode mode, Sink sink, const Mlp* model = nullptr);
  ~StreamSession();

  // Never throws for bad input; replies with an error message instead.
  void handle_line(std::string_view line);
  // Steps the pipeline until simulated time reaches t_ms.
  void advance_to(double t_ms);
  // Flushes open segments and presses, then reports efficiency. Idempotent.
  void close();

  double now_ms() const noexcept { return pipeline_->now_ms(); }
  TimeMode mode() const noexcept { return mode_; }

 private:
  class Observer;

  void emit(const std::string& msg);
  void error(const std::string& what);

  PipelineConfig cfg_;
  TimeMode mode_;
  Sink sink_;
  std::mutex sink_mu_;
  std::unique_ptr<Observer> observer_;
  std::unique_ptr<Pipeline> pipeline_;
  Drive drive_{};
  std::size_t line_no_ = 0;
  bool closed_ = false;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  TimeMode mode = TimeMode::RealTime;
  std::size_t max_line_bytes = 65536;
};

// TCP endpoint speaking the session protocol either as raw NDJSON or, when the
// client opens with an HTTP upgrade request, as one WebSocket text frame per
// message.
class StreamServer {
 public:
  StreamServer(PipelineConfig cfg, ServerOptions opts, const Mlp* model = nullptr);
  ~StreamServer();
  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  // Binds and listens; returns the bound port.
  std::uint16_t listen();
  // Accepts until stop(); each connection runs its own session thread.
  void run();
  void stop();
  std::uint16_t port() const noexcept { return port_; }

 private:
  void serve_connection(int fd);

  PipelineConfig cfg_;
  ServerOptions opts_;
  const Mlp* model_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex sessions_mu_;
  std::vector<std::jthread> sessions_;
};

// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept(std::string_view key);

}  // namespace tactile
