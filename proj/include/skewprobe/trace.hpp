#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace skewprobe {

enum class SessionMode { record, replay };

std::string_view to_string(SessionMode mode);
SessionMode parse_session_mode(std::string_view text);

// One line of the trace file: one attempt of one keyed exchange.
struct TraceEntry {
  std::string kind = "chat";  // "chat" or "oracle"
  nlohmann::json task_key;
  int attempt_index = 0;
  std::string request_text;
  std::string response_text;
  std::int64_t latency_ms = 0;
  // Wire bodies, verbatim, when recorded live.
  std::optional<std::string> request_body;
  std::optional<std::string> response_body;
  std::optional<int> http_status;

  nlohmann::json to_json() const;
  static TraceEntry from_json(const nlohmann::json& node);
};

// Record/replay handle over an append-only JSONL trace.
//
// Replay: the trace must exist; lookups are served from it and nothing is
// written. Record: an existing trace is loaded first so that resumed runs
// reuse recorded exchanges; new exchanges are appended, one flushed line
// each, through a single writer.
class Session {
 public:
  Session(SessionMode mode, std::filesystem::path trace_path);
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  SessionMode mode() const { return mode_; }
  const std::filesystem::path& trace_path() const { return path_; }

  std::optional<TraceEntry> find(std::string_view kind, const nlohmann::json& task_key,
                                 int attempt_index) const;
  void append(const TraceEntry& entry);

  std::size_t entry_count() const;
  std::size_t appended_count() const;

  static std::string lookup_key(std::string_view kind, const nlohmann::json& task_key, int attempt_index);

 private:
  SessionMode mode_;
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::string, TraceEntry, std::less<>> entries_;
  std::ofstream writer_;
  std::size_t appended_ = 0;
};

}  // namespace skewprobe
