#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>

#include "skewprobe/errors.hpp"
#include "skewprobe/transport.hpp"
#include "test_support.hpp"

TEST_CASE("the shim is loaded") {
  REQUIRE(testing::offline_guard_active());
  CHECK(testing::blocked_connects() >= 0);
}

TEST_CASE("inet connects are refused") {
  const long before = testing::blocked_connects();
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(9);
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  CHECK(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == -1);
  CHECK(errno == ENETUNREACH);
  ::close(fd);

  const int fd6 = ::socket(AF_INET6, SOCK_STREAM, 0);
  if (fd6 >= 0) {
    sockaddr_in6 a6{};
    a6.sin6_family = AF_INET6;
    a6.sin6_port = htons(9);
    a6.sin6_addr = in6addr_loopback;
    CHECK(::connect(fd6, reinterpret_cast<sockaddr*>(&a6), sizeof a6) == -1);
    ::close(fd6);
  }
  CHECK(testing::blocked_connects() >= before + 1);
}

TEST_CASE("name lookups fail") {
  addrinfo* res = nullptr;
  CHECK(::getaddrinfo("api.genderize.io", "443", nullptr, &res) != 0);
  CHECK(res == nullptr);
}

TEST_CASE("unix sockets still work") {
  int fds[2];
  REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
  CHECK(::write(fds[0], "x", 1) == 1);
  char c = 0;
  CHECK(::read(fds[1], &c, 1) == 1);
  CHECK(c == 'x');
  ::close(fds[0]);
  ::close(fds[1]);
}

TEST_CASE("the live transport fails fast instead of reaching out") {
  skewprobe::HttplibTransport transport(std::chrono::seconds(2));
  skewprobe::HttpRequest request;
  request.url = "https://api.genderize.io/?name=Emily";
  request.method = "GET";
  CHECK_THROWS_AS(transport.send(request), skewprobe::TransportFailure);
}
