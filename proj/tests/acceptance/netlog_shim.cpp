// Preloadable library that appends one line per network-related libc call
// to the file named by ANTIPHISH_NETLOG. Calls are forwarded unchanged.

#include <dlfcn.h>
#include <fcntl.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace {

void record(const char* call, int detail) {
  const char* path = std::getenv("ANTIPHISH_NETLOG");
  if (path == nullptr) return;
  const int fd = ::open(path, O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) return;
  char line[96];
  const int n = std::snprintf(line, sizeof line, "%s %d pid=%d\n", call, detail, static_cast<int>(::getpid()));
  if (n > 0 && ::write(fd, line, static_cast<std::size_t>(n)) < 0) {
    // Nothing useful to do inside an interposed libc call.
  }
  ::close(fd);
}

template <typename Fn>
Fn next(const char* name) {
  return reinterpret_cast<Fn>(::dlsym(RTLD_NEXT, name));
}

bool is_inet(int family) { return family == AF_INET || family == AF_INET6; }

}  // namespace

extern "C" {

int socket(int domain, int type, int protocol) {
  static auto real = next<int (*)(int, int, int)>("socket");
  if (is_inet(domain)) record("socket", domain);
  return real(domain, type, protocol);
}

int connect(int fd, const struct sockaddr* addr, socklen_t len) {
  static auto real = next<int (*)(int, const struct sockaddr*, socklen_t)>("connect");
  if (addr != nullptr && is_inet(addr->sa_family)) record("connect", addr->sa_family);
  return real(fd, addr, len);
}

ssize_t sendto(int fd, const void* buf, size_t n, int flags, const struct sockaddr* addr, socklen_t len) {
  static auto real = next<ssize_t (*)(int, const void*, size_t, int, const struct sockaddr*, socklen_t)>("sendto");
  if (addr != nullptr && is_inet(addr->sa_family)) record("sendto", addr->sa_family);
  return real(fd, buf, n, flags, addr, len);
}

int getaddrinfo(const char* node, const char* service, const struct addrinfo* hints, struct addrinfo** res) {
  static auto real =
      next<int (*)(const char*, const char*, const struct addrinfo*, struct addrinfo**)>("getaddrinfo");
  record("getaddrinfo", 0);
  return real(node, service, hints, res);
}

struct hostent* gethostbyname(const char* name) {
  static auto real = next<struct hostent* (*)(const char*)>("gethostbyname");
  record("gethostbyname", 0);
  return real(name);
}

}  // extern "C"
