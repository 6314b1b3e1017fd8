#include "skewprobe/trace.hpp"

#include <fstream>

#include "json_support.hpp"
#include "skewprobe/errors.hpp"

namespace skewprobe {

std::string_view to_string(SessionMode mode) { return mode == SessionMode::record ? "record" : "replay"; }

SessionMode parse_session_mode(std::string_view text) {
  if (text == "record") return SessionMode::record;
  if (text == "replay") return SessionMode::replay;
  throw UsageError("mode must be 'record' or 'replay', got '" + std::string(text) + "'");
}

nlohmann::json TraceEntry::to_json() const {
  nlohmann::json node{{"kind", kind},
                      {"task_key", task_key},
                      {"attempt_index", attempt_index},
                      {"request_text", request_text},
                      {"response_text", response_text},
                      {"latency_ms", latency_ms}};
  if (request_body) node["request_body"] = *request_body;
  if (response_body) node["response_body"] = *response_body;
  if (http_status) node["http_status"] = *http_status;
  return node;
}

TraceEntry TraceEntry::from_json(const nlohmann::json& node) {
  const std::string where = "trace entry";
  TraceEntry entry;
  entry.kind = node.value("kind", std::string("chat"));
  entry.task_key = detail::require(node, "task_key", where);
  const auto& attempt = detail::require(node, "attempt_index", where);
  if (!attempt.is_number_integer()) throw ParseError(where + ".attempt_index: expected an integer");
  entry.attempt_index = attempt.get<int>();
  entry.request_text = node.value("request_text", std::string{});
  entry.response_text = detail::require_string(node, "response_text", where);
  entry.latency_ms = node.value("latency_ms", std::int64_t{0});
  if (node.contains("request_body")) entry.request_body = node["request_body"].get<std::string>();
  if (node.contains("response_body")) entry.response_body = node["response_body"].get<std::string>();
  if (node.contains("http_status")) entry.http_status = node["http_status"].get<int>();
  return entry;
}

std::string Session::lookup_key(std::string_view kind, const nlohmann::json& task_key, int attempt_index) {
  std::string key(kind);
  key += '|';
  key += task_key.dump();
  key += '#';
  key += std::to_string(attempt_index);
  return key;
}

Session::Session(SessionMode mode, std::filesystem::path trace_path)
    : mode_(mode), path_(std::move(trace_path)) {
  std::error_code ec;
  const bool exists = std::filesystem::exists(path_, ec);
  if (mode_ == SessionMode::replay && !exists)
    throw SessionError("replay trace not found: '" + path_.string() + "'");

  if (exists) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw SessionError("cannot read trace '" + path_.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      try {
        auto entry = TraceEntry::from_json(nlohmann::json::parse(line));
        entries_.try_emplace(lookup_key(entry.kind, entry.task_key, entry.attempt_index), std::move(entry));
      } catch (const std::exception& e) {
        throw SessionError("corrupt trace '" + path_.string() + "' at line " + std::to_string(line_no) +
                           ": " + e.what());
      }
    }
  }

  if (mode_ == SessionMode::record) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
    writer_.open(path_, std::ios::binary | std::ios::app);
    if (!writer_) throw SessionError("trace not writable: '" + path_.string() + "'");
  }
}

std::optional<TraceEntry> Session::find(std::string_view kind, const nlohmann::json& task_key,
                                        int attempt_index) const {
  const auto key = lookup_key(kind, task_key, attempt_index);
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Session::append(const TraceEntry& entry) {
  if (mode_ != SessionMode::record) throw SessionError("cannot append to a replay session");
  const auto line = entry.to_json().dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  std::lock_guard lock(mutex_);
  writer_ << line << '\n';
  writer_.flush();
  if (!writer_) throw SessionError("write to trace '" + path_.string() + "' failed");
  entries_.try_emplace(lookup_key(entry.kind, entry.task_key, entry.attempt_index), entry);
  ++appended_;
}

std::size_t Session::entry_count() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::size_t Session::appended_count() const {
  std::lock_guard lock(mutex_);
  return appended_;
}

}  // namespace skewprobe
