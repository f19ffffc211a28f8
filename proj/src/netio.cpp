#include "simfuse/netio.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "simfuse/error.hpp"

namespace simfuse::net {

std::pair<std::string, int> parse_hostport(const std::string& addr) {
  const std::size_t colon = addr.rfind(':');
  if (colon == std::string::npos)
    throw Error(Errc::invalid_parameter,
                "address '" + addr + "' must be HOST:PORT");
  const std::string host = addr.substr(0, colon);
  const std::string port_str = addr.substr(colon + 1);
  int port = 0;
  try {
    port = std::stoi(port_str);
  } catch (...) {
    throw Error(Errc::invalid_parameter, "bad port in '" + addr + "'");
  }
  if (port < 0 || port > 65535)
    throw Error(Errc::invalid_parameter, "bad port in '" + addr + "'");
  return {host, port};
}

Socket::Socket(Socket&& other) noexcept
    : fd_(other.fd_), buf_(std::move(other.buf_)) {
  other.fd_ = -1;
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    buf_ = std::move(other.buf_);
    other.fd_ = -1;
  }
  return *this;
}

Socket::~Socket() { close(); }

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::optional<Socket> Socket::connect_to(const std::string& host, int port) {
  const std::string use_host = host.empty() ? "127.0.0.1" : host;
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) return std::nullopt;
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, use_host.c_str(), &sa.sin_addr) != 1) {
    ::close(fd);
    return std::nullopt;
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
    ::close(fd);
    return std::nullopt;
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Socket(fd);
}

bool Socket::send_line(const std::string& line) {
  if (fd_ < 0) return false;
  std::string msg = line;
  msg += '\n';
  std::size_t sent = 0;
  while (sent < msg.size()) {
    const ssize_t n =
        ::send(fd_, msg.data() + sent, msg.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

Socket::RecvResult Socket::recv_line(int timeout_ms) {
  while (true) {
    const std::size_t nl = buf_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buf_.substr(0, nl);
      buf_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return {RecvStatus::line, std::move(line)};
    }
    if (fd_ < 0) return {RecvStatus::closed, {}};
    pollfd pfd{fd_, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, timeout_ms);
    if (pr == 0) return {RecvStatus::timed_out, {}};
    if (pr < 0) {
      if (errno == EINTR) continue;
      return {RecvStatus::closed, {}};
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n == 0) return {RecvStatus::closed, {}};
    if (n < 0) {
      if (errno == EINTR) continue;
      return {RecvStatus::closed, {}};
    }
    buf_.append(chunk, static_cast<std::size_t>(n));
  }
}

Listener::Listener(Listener&& other) noexcept
    : fd_(other.fd_), port_(other.port_) {
  other.fd_ = -1;
}

Listener& Listener::operator=(Listener&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    port_ = other.port_;
    other.fd_ = -1;
  }
  return *this;
}

Listener::~Listener() { close(); }

void Listener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Listener Listener::bind_listen(const std::string& host, int port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0)
    throw Error(Errc::connection_failed,
                std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(static_cast<std::uint16_t>(port));
  if (host.empty()) {
    sa.sin_addr.s_addr = htonl(INADDR_ANY);
  } else if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
    ::close(fd);
    throw Error(Errc::connection_failed, "bad listen host '" + host + "'");
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 ||
      ::listen(fd, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd);
    throw Error(Errc::connection_failed,
                "cannot listen on " + host + ":" + std::to_string(port) +
                    ": " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
  Listener l;
  l.fd_ = fd;
  l.port_ = ntohs(bound.sin_port);
  return l;
}

std::optional<Socket> Listener::accept_one(int timeout_ms) {
  if (fd_ < 0) return std::nullopt;
  pollfd pfd{fd_, POLLIN, 0};
  const int pr = ::poll(&pfd, 1, timeout_ms);
  if (pr <= 0) return std::nullopt;
  const int cfd = ::accept(fd_, nullptr, nullptr);
  if (cfd < 0) return std::nullopt;
  int one = 1;
  ::setsockopt(cfd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Socket(cfd);
}

}  // namespace simfuse::net
