#pragma once

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fcntl.h>
#include <algorithm>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include "antiphish/error.hpp"

namespace antiphish::evidence {

enum class Mode { Live, Replay };

/// Gate checked before any socket is opened. Replay mode never reaches the
/// network.
class NetworkPolicy {
 public:
  explicit NetworkPolicy(Mode mode) : mode_(mode) {}

  [[nodiscard]] Mode mode() const { return mode_; }

  void require_live(std::string_view what) const {
    if (mode_ != Mode::Live) {
      throw Error(Errc::NetworkDisabled, "evidence", std::string(what) + " attempted in replay mode");
    }
  }

 private:
  Mode mode_;
};

/// Minimum spacing between calls to one service, shared by all workers.
class RateLimiter {
 public:
  explicit RateLimiter(std::chrono::milliseconds min_interval) : interval_(min_interval) {}

  void acquire() {
    std::chrono::steady_clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      const auto now = std::chrono::steady_clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  std::chrono::milliseconds interval_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

/// RAII file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Socket() { reset(); }

  [[nodiscard]] int fd() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

namespace detail_net {

inline bool wait_fd(int fd, short events, std::chrono::steady_clock::time_point deadline) {
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return false;
    pollfd p{fd, events, 0};
    int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) return false;
  }
}

}  // namespace detail_net

struct TcpFailure {
  enum class Kind { Resolve, Connect, Timeout, Io } kind;
  std::string detail;
};

/// Opens a TCP connection, sends `request` and reads until EOF. Throws
/// TcpFailure; callers translate it into their module's error code.
inline std::string tcp_exchange(const std::string& host, int port, std::string_view request,
                                std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res); rc != 0) {
    throw TcpFailure{TcpFailure::Kind::Resolve, ::gai_strerror(rc)};
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

  Socket sock;
  std::string last_error = "no address";
  bool timed_out = false;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (s.fd() < 0) continue;
    ::fcntl(s.fd(), F_SETFL, ::fcntl(s.fd(), F_GETFL) | O_NONBLOCK);
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno != EINPROGRESS) {
      last_error = std::strerror(errno);
      continue;
    }
    if (rc != 0) {
      if (!detail_net::wait_fd(s.fd(), POLLOUT, deadline)) {
        timed_out = true;
        last_error = "connect timeout";
        continue;
      }
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      if (err != 0) {
        last_error = std::strerror(err);
        continue;
      }
    }
    sock = std::move(s);
    break;
  }
  if (sock.fd() < 0) {
    throw TcpFailure{timed_out ? TcpFailure::Kind::Timeout : TcpFailure::Kind::Connect, last_error};
  }

  std::size_t sent = 0;
  while (sent < request.size()) {
    if (!detail_net::wait_fd(sock.fd(), POLLOUT, deadline)) throw TcpFailure{TcpFailure::Kind::Timeout, "send"};
    ssize_t n = ::send(sock.fd(), request.data() + sent, request.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EAGAIN || errno == EINTR) continue;
      throw TcpFailure{TcpFailure::Kind::Io, std::strerror(errno)};
    }
    sent += static_cast<std::size_t>(n);
  }

  std::string response;
  char buf[4096];
  while (true) {
    if (!detail_net::wait_fd(sock.fd(), POLLIN, deadline)) throw TcpFailure{TcpFailure::Kind::Timeout, "recv"};
    ssize_t n = ::recv(sock.fd(), buf, sizeof(buf), 0);
    if (n == 0) break;
    if (n < 0) {
      if (errno == EAGAIN || errno == EINTR) continue;
      throw TcpFailure{TcpFailure::Kind::Io, std::strerror(errno)};
    }
    response.append(buf, static_cast<std::size_t>(n));
  }
  return response;
}

}  // namespace antiphish::evidence
