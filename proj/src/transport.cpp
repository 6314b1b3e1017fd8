#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "skewprobe/transport.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <thread>

#include <httplib.h>

namespace skewprobe {

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("URL without scheme: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string url_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
        c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

HttplibTransport::HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttplibTransport::send(const HttpRequest& request) {
  const auto [origin, target] = split_url(request.url);
  httplib::Client client(origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [name, value] : request.headers) {
    if (iequals(name, "Content-Type")) {
      content_type = value;
    } else {
      headers.emplace(name, value);
    }
  }

  httplib::Result result{nullptr, httplib::Error::Unknown};
  if (request.method == "GET") {
    result = client.Get(target, headers);
  } else if (request.method == "POST") {
    result = client.Post(target, headers, request.body, content_type);
  } else {
    throw UsageError("unsupported HTTP method " + request.method);
  }
  if (!result) throw TransportFailure(request.method + " " + origin + ": " + httplib::to_string(result.error()));
  return {result->status, result->body};
}

HttpResponse OfflineTransport::send(const HttpRequest& request) {
  std::string origin = request.url;
  try {
    origin = split_url(request.url).first;
  } catch (const UsageError&) {
  }
  throw ProviderError("network access is disabled in replay mode (attempted " + request.method + " " + origin + ")");
}

Clock::time_point SystemClock::now() { return std::chrono::steady_clock::now(); }

void SystemClock::sleep_until(time_point deadline) { std::this_thread::sleep_until(deadline); }

SystemClock& SystemClock::instance() {
  static SystemClock clock;
  return clock;
}

namespace {

std::size_t capacity_for(double rpm) {
  if (!(rpm > 0.0) || !std::isfinite(rpm))
    throw ValidationError("requests_per_minute must be a positive finite number");
  return rpm >= 1.0 ? static_cast<std::size_t>(std::floor(rpm)) : 1;
}

Clock::duration window_for(double rpm) {
  const double seconds = static_cast<double>(capacity_for(rpm)) * 60.0 / rpm;
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
}

}  // namespace

RateLimiter::RateLimiter(double requests_per_minute, Clock& clock)
    : RateLimiter(capacity_for(requests_per_minute), window_for(requests_per_minute), clock) {}

RateLimiter::RateLimiter(std::size_t capacity, Clock::duration window, Clock& clock)
    : capacity_(capacity), window_(window), clock_(&clock) {
  if (capacity_ == 0) throw ValidationError("rate limiter capacity must be >= 1");
}

Clock::time_point RateLimiter::acquire() {
  Clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = clock_->now();
    slot = now;
    // Grants are reserved in non-decreasing order, so the grant capacity_
    // positions back bounds the next free slot.
    if (grants_.size() >= capacity_) slot = std::max(now, grants_[grants_.size() - capacity_] + window_);
    grants_.push_back(slot);
    while (grants_.size() > capacity_) grants_.pop_front();
  }
  if (slot > clock_->now()) clock_->sleep_until(slot);
  return slot;
}

}  // namespace skewprobe
