#include "skewprobe/provider.hpp"

#include <cstdlib>
#include <ctime>
#include <set>

#include "json_support.hpp"
#include "skewprobe/errors.hpp"

namespace skewprobe {

using nlohmann::json;

std::string_view to_string(WireFormat wire) {
  return wire == WireFormat::openai_chat ? "openai_chat" : "gemini_generate";
}

WireFormat parse_wire_format(std::string_view text) {
  if (text == "openai_chat") return WireFormat::openai_chat;
  if (text == "gemini_generate") return WireFormat::gemini_generate;
  throw ValidationError("unknown wire format '" + std::string(text) + "'");
}

void ProviderEndpoint::validate() const {
  const std::string where = "endpoint '" + model_id + "'";
  if (model_id.empty()) throw ValidationError("endpoint: empty model_id");
  if (max_in_flight < 1) throw ValidationError(where + ": max_in_flight must be >= 1");
  if (!(requests_per_minute > 0.0)) throw ValidationError(where + ": requests_per_minute must be > 0");
  if (decoding.temperature && *decoding.temperature < 0.0)
    throw ValidationError(where + ": temperature must be >= 0");
  if (decoding.max_tokens && *decoding.max_tokens < 1)
    throw ValidationError(where + ": max_tokens must be >= 1");
}

HttpRequest build_chat_request(const ProviderEndpoint& endpoint, std::string_view prompt,
                               std::string_view api_key) {
  std::string base = endpoint.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();

  HttpRequest request;
  request.method = "POST";
  request.headers.emplace_back("Content-Type", "application/json");
  json body;
  if (endpoint.wire == WireFormat::openai_chat) {
    request.url = base + "/chat/completions";
    if (!api_key.empty()) request.headers.emplace_back("Authorization", "Bearer " + std::string(api_key));
    body["model"] = endpoint.wire_model();
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    if (endpoint.decoding.temperature) body["temperature"] = *endpoint.decoding.temperature;
    if (endpoint.decoding.max_tokens) body["max_tokens"] = *endpoint.decoding.max_tokens;
  } else {
    request.url = base + "/models/" + url_encode(endpoint.wire_model()) + ":generateContent";
    if (!api_key.empty()) request.headers.emplace_back("x-goog-api-key", std::string(api_key));
    body["contents"] = json::array({{{"role", "user"}, {"parts", json::array({{{"text", prompt}}})}}});
    json generation = json::object();
    if (endpoint.decoding.temperature) generation["temperature"] = *endpoint.decoding.temperature;
    if (endpoint.decoding.max_tokens) generation["maxOutputTokens"] = *endpoint.decoding.max_tokens;
    if (!generation.empty()) body["generationConfig"] = generation;
  }
  request.body = body.dump();
  return request;
}

std::string parse_chat_response(WireFormat wire, std::string_view body) {
  json doc;
  try {
    doc = json::parse(body.begin(), body.end());
  } catch (const json::parse_error& e) {
    throw ProviderError(std::string("malformed chat response: ") + e.what());
  }
  try {
    if (wire == WireFormat::openai_chat) {
      const auto& content = doc.at("choices").at(0).at("message").at("content");
      return content.is_null() ? std::string{} : content.get<std::string>();
    }
    std::string text;
    for (const auto& part : doc.at("candidates").at(0).at("content").at("parts")) {
      if (part.contains("text") && !part.value("thought", false)) text += part["text"].get<std::string>();
    }
    return text;
  } catch (const json::exception& e) {
    throw ProviderError(std::string("unexpected chat response shape: ") + e.what());
  }
}

HttpResponse send_with_retries(HttpTransport& transport, const HttpRequest& request, Clock& clock,
                               const TransportRetryPolicy& policy, std::string_view what) {
  std::string last_error;
  for (int attempt = 0; attempt < policy.tries; ++attempt) {
    if (attempt > 0) clock.sleep_for(policy.base_backoff * (1 << (attempt - 1)));
    try {
      HttpResponse response = transport.send(request);
      if (response.status >= 200 && response.status < 300) return response;
      last_error = "HTTP " + std::to_string(response.status);
      if (response.status != 429 && response.status < 500)
        throw ProviderError(std::string(what) + ": " + last_error + ": " + response.body.substr(0, 200));
    } catch (const TransportFailure& e) {
      last_error = e.what();
    }
  }
  throw ProviderError(std::string(what) + ": giving up after " + std::to_string(policy.tries) +
                      " transport tries: " + last_error);
}

std::string read_credential(const std::string& env_name) {
  if (env_name.empty()) return {};
  const char* value = std::getenv(env_name.c_str());
  if (!value || !*value) throw ProviderError("credential environment variable '" + env_name + "' is not set");
  return value;
}

ChatClient::ChatClient(ProviderEndpoint endpoint, HttpTransport& transport, Clock& clock,
                       TransportRetryPolicy policy)
    : endpoint_(std::move(endpoint)),
      transport_(&transport),
      clock_(&clock),
      policy_(policy),
      limiter_(endpoint_.requests_per_minute, clock) {
  endpoint_.validate();
}

Completion ChatClient::complete(const TaskKey& key, int attempt_index, std::string_view prompt_text,
                                Session& session) {
  const json task_key = to_json(key);
  if (auto entry = session.find("chat", task_key, attempt_index)) return {entry->response_text, entry->latency_ms};
  if (session.mode() == SessionMode::replay)
    throw ReplayError("replay miss for " + key.to_string() + " attempt " + std::to_string(attempt_index));

  const HttpRequest request = build_chat_request(endpoint_, prompt_text, read_credential(endpoint_.api_key_env));
  limiter_.acquire();
  const auto started = clock_->now();
  const HttpResponse response =
      send_with_retries(*transport_, request, *clock_, policy_, "chat " + endpoint_.model_id);
  const auto latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(clock_->now() - started).count();

  TraceEntry entry;
  entry.kind = "chat";
  entry.task_key = task_key;
  entry.attempt_index = attempt_index;
  entry.request_text = std::string(prompt_text);
  entry.response_text = parse_chat_response(endpoint_.wire, response.body);
  entry.latency_ms = latency;
  entry.request_body = request.body;
  entry.response_body = response.body;
  entry.http_status = response.status;
  session.append(entry);
  return {entry.response_text, entry.latency_ms};
}

bool GenerationRecord::same_outcome(const GenerationRecord& other) const {
  return task == other.task && attempts == other.attempts && name == other.name && failure == other.failure;
}

json GenerationRecord::to_json() const {
  json attempts_json = json::array();
  for (const auto& a : attempts) {
    json node{{"index", a.index},
              {"request_text", a.request_text},
              {"response_text", a.response_text},
              {"latency_ms", a.latency_ms},
              {"verdict", a.valid_name() ? "valid_name" : "invalid"}};
    if (a.rejection) node["reason"] = std::string(skewprobe::to_string(*a.rejection));
    attempts_json.push_back(std::move(node));
  }
  json node{{"task_key", skewprobe::to_json(task)}, {"attempts", attempts_json},
            {"started_at", started_at}, {"finished_at", finished_at}};
  if (name) {
    node["outcome"] = {{"name", *name}};
  } else {
    node["outcome"] = {{"failed", failure ? std::string(skewprobe::to_string(*failure)) : "unknown"}};
  }
  return node;
}

GenerationRecord GenerationRecord::from_json(const json& node) {
  const std::string where = "generation record";
  GenerationRecord record;
  record.task = task_key_from_json(detail::require(node, "task_key", where));
  for (const auto& a : detail::require(node, "attempts", where)) {
    Attempt attempt;
    attempt.index = a.at("index").get<int>();
    attempt.request_text = a.value("request_text", std::string{});
    attempt.response_text = a.value("response_text", std::string{});
    attempt.latency_ms = a.value("latency_ms", std::int64_t{0});
    if (a.value("verdict", std::string{}) != "valid_name") {
      attempt.rejection = parse_reject_reason(a.value("reason", std::string{}));
      if (!attempt.rejection) throw ParseError(where + ": invalid attempt without a known reason");
    }
    record.attempts.push_back(std::move(attempt));
  }
  const auto& outcome = detail::require(node, "outcome", where);
  if (outcome.contains("name")) {
    record.name = outcome["name"].get<std::string>();
  } else {
    record.failure = parse_reject_reason(outcome.value("failed", std::string{}));
  }
  record.started_at = node.value("started_at", std::string{});
  record.finished_at = node.value("finished_at", std::string{});
  if (record.attempts.empty() || record.attempts.size() > 3)
    throw ParseError(where + " " + record.task.to_string() + ": expected 1-3 attempts");
  if (record.name.has_value() != record.attempts.back().valid_name())
    throw ParseError(where + " " + record.task.to_string() + ": outcome disagrees with last attempt");
  return record;
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const auto seconds = std::chrono::system_clock::to_time_t(now);
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  char buf[40];
  const auto n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &utc);
  std::snprintf(buf + n, sizeof buf - n, ".%03lldZ", static_cast<long long>(millis));
  return buf;
}

GenerationRecord run_probe(const ProbeTask& task, ChatClient& client, const NameValidator& validator,
                           Session& session, int retry_limit) {
  if (retry_limit < 0) throw UsageError("retry_limit must be >= 0");
  GenerationRecord record;
  record.task = task.key;
  record.started_at = iso8601_now();
  const int max_attempts = 1 + retry_limit;
  for (int index = 0; index < max_attempts; ++index) {
    const Completion completion = client.complete(task.key, index, task.prompt->text, session);
    const NameCandidate candidate = validator(completion.text, task.key.language);
    Attempt attempt;
    attempt.index = index;
    attempt.request_text = task.prompt->text;
    attempt.response_text = completion.text;
    attempt.latency_ms = completion.latency_ms;
    attempt.rejection = candidate.rejected_reason;
    record.attempts.push_back(std::move(attempt));
    if (candidate.accepted()) {
      record.name = candidate.normalized;
      break;
    }
    record.failure = candidate.rejected_reason;
  }
  if (record.name) record.failure.reset();
  record.finished_at = iso8601_now();
  return record;
}

std::size_t missing_count(std::span<const GenerationRecord> records, std::span<const ProbeTask> plan) {
  std::set<TaskKey> valid;
  for (const auto& r : records) {
    if (r.has_name()) valid.insert(r.task);
  }
  std::size_t missing = 0;
  for (const auto& task : plan) {
    if (!valid.contains(task.key)) ++missing;
  }
  return missing;
}

}  // namespace skewprobe
