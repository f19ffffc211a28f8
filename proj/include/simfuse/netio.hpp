#pragma once

#include <optional>
#include <string>
#include <utility>

namespace simfuse::net {

// host:port with an optional host part; empty host means all interfaces for
// binds and loopback for connects.
std::pair<std::string, int> parse_hostport(const std::string& addr);

// Blocking line-framed TCP stream with poll-based receive timeouts.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  static std::optional<Socket> connect_to(const std::string& host, int port);

  bool valid() const { return fd_ >= 0; }
  void close();

  // Appends '\n'; false when the peer is gone.
  bool send_line(const std::string& line);

  enum class RecvStatus { line, timed_out, closed };
  struct RecvResult {
    RecvStatus status;
    std::string line;
  };
  RecvResult recv_line(int timeout_ms);

 private:
  int fd_ = -1;
  std::string buf_;
};

class Listener {
 public:
  Listener() = default;
  Listener(Listener&& other) noexcept;
  Listener& operator=(Listener&& other) noexcept;
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  // Throws ConnectionFailed when the address cannot be bound.
  static Listener bind_listen(const std::string& host, int port);

  int port() const { return port_; }
  bool valid() const { return fd_ >= 0; }
  void close();
  std::optional<Socket> accept_one(int timeout_ms);

 private:
  int fd_ = -1;
  int port_ = 0;
};

}  // namespace simfuse::net
