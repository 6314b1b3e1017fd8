#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "skewprobe/errors.hpp"

namespace skewprobe {

struct HttpRequest {
  std::string method = "POST";
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Connection-level failure (refused, reset, timeout). Retryable.
class TransportFailure : public Error {
 public:
  using Error::Error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

// cpp-httplib backed transport; http:// and https:// URLs.
class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(60));
  HttpResponse send(const HttpRequest& request) override;

 private:
  std::chrono::seconds timeout_;
};

// Used in replay mode: any send is a bug, reported as ProviderError.
class OfflineTransport final : public HttpTransport {
 public:
  HttpResponse send(const HttpRequest& request) override;
};

class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  using duration = std::chrono::steady_clock::duration;

  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_until(time_point deadline) = 0;
  void sleep_for(duration d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
 public:
  time_point now() override;
  void sleep_until(time_point deadline) override;
  static SystemClock& instance();
};

// Sliding-window limiter: any half-open window of length window() holds at
// most capacity() grants. requests_per_minute >= 1 gives capacity
// floor(rpm) over 60 s; below 1 gives one grant per 60/rpm seconds.
class RateLimiter {
 public:
  RateLimiter(double requests_per_minute, Clock& clock);
  RateLimiter(std::size_t capacity, Clock::duration window, Clock& clock);

  // Blocks until a slot is free; returns the granted time.
  Clock::time_point acquire();

  std::size_t capacity() const { return capacity_; }
  Clock::duration window() const { return window_; }

 private:
  std::size_t capacity_;
  Clock::duration window_;
  Clock* clock_;
  std::mutex mutex_;
  std::deque<Clock::time_point> grants_;
};

// "https://host:port/path?q" -> {"https://host:port", "/path?q"}.
std::pair<std::string, std::string> split_url(const std::string& url);

std::string url_encode(std::string_view text);

}  // namespace skewprobe
