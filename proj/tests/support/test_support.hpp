#pragma once

#include <dlfcn.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "skewprobe/transport.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return SKEWPROBE_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }
inline std::filesystem::path demo_dir() { return source_dir() / "fixtures" / "demo"; }

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("skewprobe-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Time only moves when someone sleeps.
class ManualClock final : public skewprobe::Clock {
 public:
  time_point now() override {
    std::lock_guard lock(mutex_);
    return now_;
  }
  void sleep_until(time_point deadline) override {
    std::lock_guard lock(mutex_);
    sleeps_.push_back(deadline - now_);
    if (deadline > now_) now_ = deadline;
  }
  void advance(duration d) {
    std::lock_guard lock(mutex_);
    now_ += d;
  }
  std::vector<duration> sleeps() const {
    std::lock_guard lock(mutex_);
    return sleeps_;
  }

 private:
  mutable std::mutex mutex_;
  time_point now_{std::chrono::hours(1)};
  std::vector<duration> sleeps_;
};

// Serves queued responses in order, or a handler when the queue is empty.
class ScriptedTransport final : public skewprobe::HttpTransport {
 public:
  using Handler = std::function<skewprobe::HttpResponse(const skewprobe::HttpRequest&)>;

  void push(int status, std::string body) {
    std::lock_guard lock(mutex_);
    queue_.push_back({status, std::move(body), false});
  }
  void push_failure() {
    std::lock_guard lock(mutex_);
    queue_.push_back({0, {}, true});
  }
  void on_empty(Handler handler) { handler_ = std::move(handler); }

  skewprobe::HttpResponse send(const skewprobe::HttpRequest& request) override {
    std::unique_lock lock(mutex_);
    requests_.push_back(request);
    if (!queue_.empty()) {
      Step step = queue_.front();
      queue_.pop_front();
      if (step.fail) throw skewprobe::TransportFailure("scripted connection failure");
      return {step.status, step.body};
    }
    lock.unlock();
    if (handler_) return handler_(request);
    throw skewprobe::TransportFailure("script exhausted");
  }

  std::vector<skewprobe::HttpRequest> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

 private:
  struct Step {
    int status;
    std::string body;
    bool fail;
  };
  mutable std::mutex mutex_;
  std::deque<Step> queue_;
  std::vector<skewprobe::HttpRequest> requests_;
  Handler handler_;
};

// True when the no-network shim is preloaded into this process.
inline bool offline_guard_active() {
  using Fn = int (*)();
  auto fn = reinterpret_cast<Fn>(dlsym(RTLD_DEFAULT, "skewprobe_offline_guard_active"));
  return fn && fn() == 1;
}

inline long blocked_connects() {
  using Fn = long (*)();
  auto fn = reinterpret_cast<Fn>(dlsym(RTLD_DEFAULT, "skewprobe_blocked_connects"));
  return fn ? fn() : -1;
}

}  // namespace testing
