// Preloaded into every offline test: any attempt to reach an IPv4/IPv6
// address fails with ENETUNREACH and name lookups fail. Unix sockets pass.
#include <dlfcn.h>
#include <errno.h>
#include <netdb.h>
#include <sys/socket.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>

namespace {

std::atomic<long> blocked{0};

bool is_inet(const sockaddr* addr) {
  return addr && (addr->sa_family == AF_INET || addr->sa_family == AF_INET6);
}

void note(const char* what) {
  ++blocked;
  if (std::getenv("NO_NETWORK_QUIET") == nullptr) std::fprintf(stderr, "no_network: blocked %s\n", what);
}

template <typename F>
F next(const char* name) {
  return reinterpret_cast<F>(dlsym(RTLD_NEXT, name));
}

}  // namespace

extern "C" {

int skewprobe_offline_guard_active() { return 1; }
long skewprobe_blocked_connects() { return blocked.load(); }

int connect(int fd, const sockaddr* addr, socklen_t len) {
  if (is_inet(addr)) {
    note("connect");
    errno = ENETUNREACH;
    return -1;
  }
  static auto real = next<int (*)(int, const sockaddr*, socklen_t)>("connect");
  return real(fd, addr, len);
}

ssize_t sendto(int fd, const void* buf, size_t n, int flags, const sockaddr* addr, socklen_t len) {
  if (is_inet(addr)) {
    note("sendto");
    errno = ENETUNREACH;
    return -1;
  }
  static auto real = next<ssize_t (*)(int, const void*, size_t, int, const sockaddr*, socklen_t)>("sendto");
  return real(fd, buf, n, flags, addr, len);
}

int getaddrinfo(const char* node, const char*, const addrinfo*, addrinfo** res) {
  (void)node;
  note("getaddrinfo");
  if (res) *res = nullptr;
  return EAI_FAIL;
}

}  // extern "C"
