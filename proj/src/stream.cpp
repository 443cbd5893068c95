#include "tactile/stream.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <openssl/evp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>

#include <json.hpp>

#include "tactile/errors.hpp"

namespace tactile {

using nlohmann::json;

class StreamSession::Observer : public PipelineObserver {
 public:
  Observer(StreamSession& s) : s_(s) {}

  void on_frame(const CodeFrame& f) override { last_codes_ = f.codes; }

  void on_window(const WindowReport& r) override {
    ++windows_;
    if (!r.active) return;
    ++active_;
    std::vector<int> codes(last_codes_.begin(), last_codes_.end());
    std::vector<int> max(r.max.begin(), r.max.end());
    s_.emit(json{{"window", r.t_start_ms},
                 {"index", r.window_idx},
                 {"codes", codes},
                 {"peaks", r.peaks},
                 {"max", max}}
                .dump());
  }

  void on_letter(const LetterResult& l) override {
    json letter = l.continuous ? json("~") : l.letter ? json(std::string(1, *l.letter)) : json(nullptr);
    s_.emit(json{{"morse", letter}, {"code", l.code}}.dump());
    emit_efficiency();
  }

  void on_symbol(const SymbolResult& r) override {
    if (r.symbol) {
      s_.emit(json{{"symbol", std::string(to_string(*r.symbol))}, {"probs", r.probs}}.dump());
    } else {
      s_.emit(json{{"symbol", nullptr}, {"feature", r.feature}}.dump());
    }
    emit_efficiency();
  }

  void emit_efficiency() {
    const PipelineConfig& cfg = s_.cfg_;
    const double seconds = static_cast<double>(windows_) * cfg.codec.window_ms / 1000.0;
    const double bits = static_cast<double>(active_ * cfg.frames_per_window() * kUnitBits);
    const double ratio = seconds > 0.0 ? std::clamp(1.0 - bits / (108000.0 * seconds), 0.0, 1.0) : 1.0;
    s_.emit(json{{"efficiency", ratio}}.dump());
  }

 private:
  StreamSession& s_;
  Codes last_codes_{};
  std::uint64_t windows_ = 0;
  std::uint64_t active_ = 0;
};

StreamSession::StreamSession(PipelineConfig cfg, TimeMode mode, Sink sink, const Mlp* model)
    : cfg_(std::move(cfg)), mode_(mode), sink_(std::move(sink)),
      observer_(std::make_unique<Observer>(*this)) {
  pipeline_ = std::make_unique<Pipeline>(cfg_, *observer_, model);
}

StreamSession::~StreamSession() {
  try {
    close();
  } catch (...) {
  }
}

void StreamSession::emit(const std::string& msg) {
  std::lock_guard lock(sink_mu_);
  sink_(msg);
}

void StreamSession::error(const std::string& what) {
  emit(json{{"error", what}, {"line", line_no_}}.dump());
}

void StreamSession::advance_to(double t_ms) {
  while (pipeline_->now_ms() < t_ms - 1e-9) pipeline_->step(drive_);
}

void StreamSession::handle_line(std::string_view line) {
  ++line_no_;
  if (closed_) return error("session closed");
  const auto first = line.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return;

  json msg;
  try {
    msg = json::parse(line);
  } catch (const json::parse_error& e) {
    return error(std::string("malformed JSON: ") + e.what());
  }
  if (!msg.is_object()) return error("message must be a JSON object");

  const int kinds = int(msg.contains("press")) + int(msg.contains("release")) + int(msg.contains("advance"));
  if (kinds != 1) return error("message needs exactly one of press, release, advance");
  for (const auto& [key, _] : msg.items()) {
    if (key != "press" && key != "release" && key != "advance" && key != "t" && key != "pressure_kpa") {
      return error("unknown key '" + key + "'");
    }
  }

  auto read_time = [&](const json& v) -> std::optional<double> {
    if (!v.is_number()) return std::nullopt;
    const double t = v.get<double>();
    if (!(t >= now_ms() - cfg_.tick_ms) || t - now_ms() > 600000.0) return std::nullopt;
    return t;
  };
  auto read_cell = [&](const json& v) -> std::optional<std::size_t> {
    if (!v.is_number_integer()) return std::nullopt;
    const auto c = v.get<long long>();
    if (c < 0 || c >= static_cast<long long>(kChannels)) return std::nullopt;
    return static_cast<std::size_t>(c);
  };

  try {
    if (msg.contains("advance")) {
      if (mode_ == TimeMode::RealTime) return error("advance is only accepted in accelerated mode");
      const auto t = read_time(msg["advance"]);
      if (!t) return error("advance needs a time not earlier than " + std::to_string(now_ms()) + " ms");
      advance_to(*t);
      return;
    }

    const bool press = msg.contains("press");
    const auto cell = read_cell(press ? msg["press"] : msg["release"]);
    if (!cell) return error("cell must be an integer in 0..8");
    double kpa = 0.0;
    if (press) {
      kpa = 60.0;
      if (msg.contains("pressure_kpa")) {
        const auto& p = msg["pressure_kpa"];
        if (!p.is_number() || !(p.get<double>() > 0.0 && p.get<double>() <= 150.0)) {
          return error("pressure_kpa must be in (0, 150]");
        }
        kpa = p.get<double>();
      }
    } else if (msg.contains("pressure_kpa")) {
      return error("release takes no pressure_kpa");
    }

    if (mode_ == TimeMode::Accelerated && msg.contains("t")) {
      const auto t = read_time(msg["t"]);
      if (!t) return error("t must be a time not earlier than " + std::to_string(now_ms()) + " ms");
      advance_to(*t);
    }
    drive_[*cell].kpa = kpa;
  } catch (const Error& e) {
    error(e.what());
  }
}

void StreamSession::close() {
  if (closed_) return;
  closed_ = true;
  pipeline_->finish();
  observer_->emit_efficiency();
}

namespace {

constexpr std::string_view kWsGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

bool send_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::send(fd, data, n, MSG_NOSIGNAL);
    if (k <= 0) return false;
    data += k;
    n -= static_cast<std::size_t>(k);
  }
  return true;
}

class Connection {
 public:
  Connection(int fd, std::size_t max_line) : fd_(fd), max_line_(max_line) {}
  ~Connection() { ::close(fd_); }

  void send(const std::string& msg) {
    if (dead_) return;
    if (!websocket_) {
      std::string line = msg + '\n';
      dead_ = !send_all(fd_, line.data(), line.size());
      return;
    }
    send_frame(0x1, msg);
  }

  // Returns false once the peer is gone or has closed.
  template <class OnLine>
  bool feed(const char* data, std::size_t n, OnLine&& on_line) {
    in_.append(data, n);
    if (!decided_) {
      if (in_.size() < 4) return true;
      if (in_.compare(0, 4, "GET ") != 0) {
        decided_ = true;
      } else {
        const auto end = in_.find("\r\n\r\n");
        if (end == std::string::npos) return in_.size() <= max_line_;
        if (!handshake(in_.substr(0, end))) return false;
        in_.erase(0, end + 4);
        decided_ = websocket_ = true;
      }
    }
    return websocket_ ? parse_frames(on_line) : split_lines(on_line);
  }

  bool dead() const noexcept { return dead_; }

  // Ends a WebSocket conversation with a close frame; raw sockets just close.
  void shutdown() {
    if (websocket_) send_frame(0x8, "");
  }

 private:
  template <class OnLine>
  bool split_lines(OnLine& on_line) {
    std::size_t pos;
    while ((pos = in_.find('\n')) != std::string::npos) {
      on_line(std::string_view(in_).substr(0, pos));
      in_.erase(0, pos + 1);
    }
    if (in_.size() > max_line_) {
      on_line(std::string_view("<line too long>"));
      in_.clear();
    }
    return true;
  }

  template <class OnLine>
  bool parse_frames(OnLine& on_line) {
    for (;;) {
      if (in_.size() < 2) return true;
      const auto* b = reinterpret_cast<const unsigned char*>(in_.data());
      const bool fin = b[0] & 0x80;
      const int opcode = b[0] & 0x0F;
      const bool masked = b[1] & 0x80;
      std::uint64_t len = b[1] & 0x7F;
      std::size_t off = 2;
      if (len == 126) {
        if (in_.size() < 4) return true;
        len = (std::uint64_t(b[2]) << 8) | b[3];
        off = 4;
      } else if (len == 127) {
        if (in_.size() < 10) return true;
        len = 0;
        for (int i = 0; i < 8; ++i) len = (len << 8) | b[2 + i];
        off = 10;
      }
      if (len > max_line_) return false;
      const std::size_t need = off + (masked ? 4 : 0) + len;
      if (in_.size() < need) return true;
      std::string payload = in_.substr(off + (masked ? 4 : 0), len);
      if (masked) {
        for (std::size_t i = 0; i < payload.size(); ++i) payload[i] ^= in_[off + (i & 3)];
      }
      in_.erase(0, need);

      if (opcode == 0x8) return false;
      if (opcode == 0x9) {
        send_frame(0xA, payload);
        continue;
      }
      if (opcode == 0x1 || opcode == 0x0) {
        message_ += payload;
        if (!fin) continue;
        std::string_view rest = message_;
        std::size_t pos;
        while ((pos = rest.find('\n')) != std::string_view::npos) {
          on_line(rest.substr(0, pos));
          rest.remove_prefix(pos + 1);
        }
        on_line(rest);
        message_.clear();
      }
    }
  }

  bool handshake(const std::string& request) {
    std::string key;
    std::size_t start = 0;
    while (start < request.size()) {
      auto end = request.find("\r\n", start);
      if (end == std::string::npos) end = request.size();
      const std::string header = request.substr(start, end - start);
      const auto colon = header.find(':');
      if (colon != std::string::npos) {
        std::string name = header.substr(0, colon);
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
        if (name == "sec-websocket-key") {
          key = header.substr(colon + 1);
          key.erase(0, key.find_first_not_of(' '));
          key.erase(key.find_last_not_of(" \t") + 1);
        }
      }
      start = end + 2;
    }
    if (key.empty()) {
      const std::string resp = "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\n\r\n";
      send_all(fd_, resp.data(), resp.size());
      return false;
    }
    const std::string resp =
        "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
        "Sec-WebSocket-Accept: " + websocket_accept(key) + "\r\n\r\n";
    return send_all(fd_, resp.data(), resp.size());
  }

  void send_frame(int opcode, const std::string& payload) {
    std::string frame;
    frame.push_back(static_cast<char>(0x80 | opcode));
    if (payload.size() < 126) {
      frame.push_back(static_cast<char>(payload.size()));
    } else if (payload.size() < 65536) {
      frame.push_back(126);
      frame.push_back(static_cast<char>(payload.size() >> 8));
      frame.push_back(static_cast<char>(payload.size() & 0xFF));
    } else {
      frame.push_back(127);
      for (int i = 7; i >= 0; --i) frame.push_back(static_cast<char>((std::uint64_t(payload.size()) >> (8 * i)) & 0xFF));
    }
    frame += payload;
    dead_ = dead_ || !send_all(fd_, frame.data(), frame.size());
  }

  int fd_;
  std::size_t max_line_;
  std::string in_;
  std::string message_;
  bool decided_ = false;
  bool websocket_ = false;
  bool dead_ = false;
};

}  // namespace

std::string websocket_accept(std::string_view key) {
  const std::string input = std::string(key) + std::string(kWsGuid);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(input.data(), input.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw Error("SHA-1 digest failed");
  }
  unsigned char out[4 * ((EVP_MAX_MD_SIZE + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(out, digest, static_cast<int>(len));
  return std::string(reinterpret_cast<char*>(out), static_cast<std::size_t>(n));
}

StreamServer::StreamServer(PipelineConfig cfg, ServerOptions opts, const Mlp* model)
    : cfg_(std::move(cfg)), opts_(std::move(opts)), model_(model) {
  cfg_.validate();
}

StreamServer::~StreamServer() {
  stop();
  {
    std::lock_guard lock(sessions_mu_);
    sessions_.clear();  // joins
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::uint16_t StreamServer::listen() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(opts_.port);
  if (::inet_pton(AF_INET, opts_.host.c_str(), &addr.sin_addr) != 1) {
    throw ConfigError("[config:serve] bad host address '" + opts_.host + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    throw Error("bind " + opts_.host + ":" + std::to_string(opts_.port) + ": " + std::strerror(errno));
  }
  if (::listen(listen_fd_, 16) != 0) throw Error(std::string("listen: ") + std::strerror(errno));
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  return port_;
}

void StreamServer::run() {
  if (listen_fd_ < 0) listen();
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::lock_guard lock(sessions_mu_);
    sessions_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void StreamServer::stop() { stopping_ = true; }

void StreamServer::serve_connection(int fd) {
  Connection conn(fd, opts_.max_line_bytes);
  try {
    StreamSession session(cfg_, opts_.mode, [&conn](const std::string& m) { conn.send(m); }, model_);
    const auto start = std::chrono::steady_clock::now();
    const bool realtime = opts_.mode == TimeMode::RealTime;
    char buf[4096];
    while (!stopping_ && !conn.dead()) {
      pollfd p{fd, POLLIN, 0};
      const int ready = ::poll(&p, 1, realtime ? 5 : 100);
      if (realtime) {
        const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
        session.advance_to(elapsed.count());
      }
      if (ready <= 0) continue;
      const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
      if (n <= 0) break;
      if (!conn.feed(buf, static_cast<std::size_t>(n), [&](std::string_view line) { session.handle_line(line); })) break;
    }
    session.close();
    conn.shutdown();
  } catch (const std::exception& e) {
    conn.send(json{{"error", e.what()}, {"line", 0}}.dump());
  }
}

}  // namespace tactile
