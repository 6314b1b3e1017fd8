#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "skewprobe/namenorm.hpp"
#include "skewprobe/prompting.hpp"
#include "skewprobe/trace.hpp"
#include "skewprobe/transport.hpp"

namespace skewprobe {

enum class WireFormat { openai_chat, gemini_generate };

std::string_view to_string(WireFormat wire);
WireFormat parse_wire_format(std::string_view text);

struct Decoding {
  std::optional<double> temperature;
  std::optional<int> max_tokens;

  bool operator==(const Decoding&) const = default;
};

struct ProviderEndpoint {
  std::string model_id;
  // Model name sent on the wire; defaults to model_id.
  std::string api_model;
  std::string base_url;
  // Name of the environment variable holding the credential.
  std::string api_key_env;
  WireFormat wire = WireFormat::openai_chat;
  int max_in_flight = 1;
  double requests_per_minute = 60.0;
  Decoding decoding;

  const std::string& wire_model() const { return api_model.empty() ? model_id : api_model; }
  void validate() const;
};

// Transport-level retries; separate from the invalid-name retry budget.
struct TransportRetryPolicy {
  int tries = 3;
  std::chrono::milliseconds base_backoff{1000};
};

struct Completion {
  std::string text;
  std::int64_t latency_ms = 0;
};

// Builds and parses provider wire bodies.
HttpRequest build_chat_request(const ProviderEndpoint& endpoint, std::string_view prompt,
                               std::string_view api_key);
std::string parse_chat_response(WireFormat wire, std::string_view body);

// Sends one request with bounded exponential backoff on connection failures,
// HTTP 429 and 5xx. Other statuses fail immediately.
HttpResponse send_with_retries(HttpTransport& transport, const HttpRequest& request, Clock& clock,
                               const TransportRetryPolicy& policy, std::string_view what);

// Reads a credential; empty name means no credential.
std::string read_credential(const std::string& env_name);

class ChatClient {
 public:
  ChatClient(ProviderEndpoint endpoint, HttpTransport& transport, Clock& clock = SystemClock::instance(),
             TransportRetryPolicy policy = {});

  // Replay: served from the trace or ReplayError. Record: served from the
  // trace when already present, otherwise sent live and appended.
  Completion complete(const TaskKey& key, int attempt_index, std::string_view prompt_text, Session& session);

  const ProviderEndpoint& endpoint() const { return endpoint_; }

 private:
  ProviderEndpoint endpoint_;
  HttpTransport* transport_;
  Clock* clock_;
  TransportRetryPolicy policy_;
  RateLimiter limiter_;
};

struct Attempt {
  int index = 0;
  std::string request_text;
  std::string response_text;
  std::int64_t latency_ms = 0;
  // Absent when the response was accepted as a name.
  std::optional<RejectReason> rejection;

  bool valid_name() const { return !rejection.has_value(); }
  bool operator==(const Attempt&) const = default;
};

struct GenerationRecord {
  TaskKey task;
  std::vector<Attempt> attempts;
  std::optional<std::string> name;
  std::optional<RejectReason> failure;
  // Wall-clock ISO-8601; not part of record identity.
  std::string started_at;
  std::string finished_at;

  bool has_name() const { return name.has_value(); }
  // Field-for-field equality, timestamps excluded.
  bool same_outcome(const GenerationRecord& other) const;

  nlohmann::json to_json() const;
  static GenerationRecord from_json(const nlohmann::json& node);
};

using NameValidator = std::function<NameCandidate(std::string_view raw, std::string_view language)>;

inline constexpr int kDefaultRetryLimit = 2;

// Up to 1 + retry_limit attempts, stopping at the first accepted name.
// Provider and replay errors propagate; no partial record is returned.
GenerationRecord run_probe(const ProbeTask& task, ChatClient& client, const NameValidator& validator,
                           Session& session, int retry_limit = kDefaultRetryLimit);

// Plan tasks whose record is absent or failed.
std::size_t missing_count(std::span<const GenerationRecord> records, std::span<const ProbeTask> plan);

std::string iso8601_now();

}  // namespace skewprobe
