#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "skewprobe/errors.hpp"
#include "skewprobe/namenorm.hpp"
#include "skewprobe/provider.hpp"
#include "test_support.hpp"

using namespace skewprobe;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::string openai_reply(const std::string& text) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})}}.dump();
}

ProviderEndpoint endpoint(std::string id = "stub-model") {
  ProviderEndpoint e;
  e.model_id = std::move(id);
  e.base_url = "https://llm.invalid/v1/";
  e.requests_per_minute = 6000;
  return e;
}

ProbeTask task(const std::string& lang = "fa", int trial = 0) {
  auto prompt = std::make_shared<RenderedPrompt>();
  prompt->text = "instruction <sentence> My friend is a teacher. </sentence>";
  prompt->language = lang;
  prompt->domain = DomainId::profession;
  prompt->category_id = "teacher";
  return {{"stub-model", lang, DomainId::profession, "teacher", trial}, prompt};
}

const NameValidator validator = [](std::string_view raw, std::string_view lang) {
  static const NamePipeline pipeline;
  return pipeline(raw, lang);
};

}  // namespace

TEST_CASE("rate limiter keeps every window under capacity") {
  testing::ManualClock clock;
  RateLimiter limiter(60.0, clock);
  CHECK(limiter.capacity() == 60);
  CHECK(limiter.window() == std::chrono::seconds(60));
  std::vector<Clock::time_point> grants;
  for (int i = 0; i < 200; ++i) {
    grants.push_back(limiter.acquire());
    if (i % 7 == 0) clock.advance(300ms);
  }
  for (std::size_t i = 0; i < grants.size(); ++i) {
    std::size_t in_window = 0;
    for (std::size_t j = i; j < grants.size() && grants[j] < grants[i] + limiter.window(); ++j) ++in_window;
    CHECK(in_window <= limiter.capacity());
  }
  // the 61st request of a burst waits until the first leaves the window
  testing::ManualClock c2;
  RateLimiter burst(60.0, c2);
  const auto first = burst.acquire();
  for (int i = 1; i < 60; ++i) CHECK(burst.acquire() == first);
  CHECK(burst.acquire() == first + 60s);
}

TEST_CASE("fractional rate gives one grant per interval") {
  testing::ManualClock clock;
  RateLimiter limiter(0.5, clock);
  CHECK(limiter.capacity() == 1);
  const auto a = limiter.acquire();
  const auto b = limiter.acquire();
  CHECK(b - a == std::chrono::seconds(120));
}

TEST_CASE("rate limiter under concurrent callers") {
  testing::ManualClock clock;
  RateLimiter limiter(10, 1s, clock);
  std::mutex m;
  std::vector<Clock::time_point> grants;
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 4; ++t)
      threads.emplace_back([&] {
        for (int i = 0; i < 25; ++i) {
          auto g = limiter.acquire();
          std::lock_guard lock(m);
          grants.push_back(g);
        }
      });
  }
  std::sort(grants.begin(), grants.end());
  REQUIRE(grants.size() == 100);
  for (std::size_t i = 0; i + 10 < grants.size(); ++i) CHECK(grants[i + 10] - grants[i] >= 1s);
}

TEST_CASE("transport retries back off on connection failures, 429 and 5xx") {
  testing::ManualClock clock;
  testing::ScriptedTransport transport;
  transport.push_failure();
  transport.push(429, "slow down");
  transport.push(200, "ok");
  const auto r = send_with_retries(transport, {}, clock, {}, "t");
  CHECK(r.body == "ok");
  const auto sleeps = clock.sleeps();
  REQUIRE(sleeps.size() == 2);
  CHECK(sleeps[0] == std::chrono::seconds(1));
  CHECK(sleeps[1] == std::chrono::seconds(2));

  testing::ScriptedTransport dead;
  for (int i = 0; i < 3; ++i) dead.push(503, "down");
  CHECK_THROWS_AS(send_with_retries(dead, {}, clock, {}, "t"), ProviderError);
  CHECK(dead.requests().size() == 3);

  testing::ScriptedTransport bad;
  bad.push(401, "no key");
  bad.push(200, "never reached");
  CHECK_THROWS_AS(send_with_retries(bad, {}, clock, {}, "t"), ProviderError);
  CHECK(bad.requests().size() == 1);
}

TEST_CASE("wire formats") {
  auto e = endpoint();
  e.decoding.temperature = 0.7;
  auto req = build_chat_request(e, "hello", "sk-secret");
  CHECK(req.url == "https://llm.invalid/v1/chat/completions");
  CHECK(json::parse(req.body)["model"] == "stub-model");
  CHECK(json::parse(req.body)["messages"][0]["content"] == "hello");
  CHECK(json::parse(req.body)["temperature"] == 0.7);
  CHECK(std::find(req.headers.begin(), req.headers.end(),
                  std::pair<std::string, std::string>{"Authorization", "Bearer sk-secret"}) != req.headers.end());

  e.wire = WireFormat::gemini_generate;
  e.api_model = "gem-pro";
  req = build_chat_request(e, "hello", "k");
  CHECK(req.url == "https://llm.invalid/v1/models/gem-pro:generateContent");
  CHECK(json::parse(req.body)["contents"][0]["parts"][0]["text"] == "hello");

  CHECK(parse_chat_response(WireFormat::openai_chat, openai_reply("Emily")) == "Emily");
  CHECK(parse_chat_response(WireFormat::gemini_generate,
                            R"({"candidates":[{"content":{"parts":[{"text":"thinking","thought":true},{"text":"نگین"}]}}]})") ==
        "نگین");
  CHECK_THROWS_AS(parse_chat_response(WireFormat::openai_chat, "{}"), ProviderError);
  CHECK_THROWS_AS(parse_chat_response(WireFormat::openai_chat, "not json"), ProviderError);
}

TEST_CASE("endpoint validation") {
  auto e = endpoint();
  e.max_in_flight = 0;
  CHECK_THROWS_AS(e.validate(), ValidationError);
  e = endpoint();
  e.requests_per_minute = 0;
  CHECK_THROWS_AS(e.validate(), ValidationError);
  CHECK_THROWS_AS(parse_wire_format("soap"), ValidationError);
}

TEST_CASE("record then replay") {
  testing::TempDir dir("provider");
  const auto trace = dir / "trace.jsonl";
  ::setenv("SKEWPROBE_TEST_KEY", "sk-do-not-log", 1);
  auto e = endpoint();
  e.api_key_env = "SKEWPROBE_TEST_KEY";
  testing::ManualClock clock;
  testing::ScriptedTransport transport;
  transport.push(200, openai_reply("Emily"));
  const TaskKey key{"stub-model", "en", DomainId::profession, "teacher", 0};
  {
    Session session(SessionMode::record, trace);
    ChatClient client(e, transport, clock);
    CHECK(client.complete(key, 0, "prompt", session).text == "Emily");
    // a second call is served from the trace
    CHECK(client.complete(key, 0, "prompt", session).text == "Emily");
    CHECK(session.appended_count() == 1);
  }
  CHECK(transport.requests().size() == 1);
  CHECK(testing::slurp(trace).find("sk-do-not-log") == std::string::npos);

  Session replay(SessionMode::replay, trace);
  CHECK(replay.entry_count() == 1);
  OfflineTransport offline;
  ChatClient client(e, offline, clock);
  CHECK(client.complete(key, 0, "prompt", replay).text == "Emily");
  CHECK_THROWS_AS(client.complete(key, 1, "prompt", replay), ReplayError);
  CHECK_THROWS_AS(offline.send({}), ProviderError);
}

TEST_CASE("replay fixture entry with a Persian name") {
  testing::TempDir dir("provider-fa");
  const auto trace = dir / "trace.jsonl";
  const TaskKey key{"stub-model", "fa", DomainId::profession, "teacher", 0};
  {
    Session s(SessionMode::record, trace);
    TraceEntry entry;
    entry.task_key = to_json(key);
    entry.request_text = "... معلم ...";
    entry.response_text = "نگین";
    s.append(entry);
  }
  Session s(SessionMode::replay, trace);
  OfflineTransport offline;
  ChatClient client(endpoint(), offline);
  CHECK(client.complete(key, 0, "... معلم ...", s).text == "نگین");
}

TEST_CASE("session errors") {
  CHECK_THROWS_AS(Session(SessionMode::replay, "/nonexistent/trace.jsonl"), SessionError);
  testing::TempDir dir("session");
  CHECK_THROWS_AS(Session(SessionMode::record, dir.path()), SessionError);  // a directory is not writable as a file
  if (::geteuid() != 0) {
    std::filesystem::permissions(dir.path(), std::filesystem::perms::owner_read | std::filesystem::perms::owner_exec);
    CHECK_THROWS_AS(Session(SessionMode::record, dir / "t.jsonl"), SessionError);
    std::filesystem::permissions(dir.path(), std::filesystem::perms::owner_all);
  }
  testing::spit(dir / "bad.jsonl", "{\"kind\":\"chat\"}\nnot json\n");
  try {
    Session s(SessionMode::replay, dir / "bad.jsonl");
    FAIL("expected SessionError");
  } catch (const SessionError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  testing::spit(dir / "empty.jsonl", "");
  Session replay(SessionMode::replay, dir / "empty.jsonl");
  CHECK_THROWS_AS(replay.append(TraceEntry{}), SessionError);
}

TEST_CASE("run_probe retry protocol") {
  testing::TempDir dir("probe");
  testing::ManualClock clock;
  testing::ScriptedTransport transport;
  Session session(SessionMode::record, dir / "trace.jsonl");
  ChatClient client(endpoint(), transport, clock);

  SUBCASE("two refusals then a name") {
    transport.push(200, openai_reply("متأسفم، نمی‌توانم نامی پیشنهاد بدهم"));
    transport.push(200, openai_reply("Alireza"));
    transport.push(200, openai_reply("علیرضا"));
    const auto r = run_probe(task("fa"), client, validator, session);
    CHECK(r.attempts.size() == 3);
    CHECK(r.name == "علیرضا");
    CHECK(!r.failure);
    CHECK(r.attempts[0].rejection == RejectReason::non_name);
    CHECK(r.attempts[1].rejection == RejectReason::wrong_script);
    CHECK(r.attempts[2].valid_name());
  }
  SUBCASE("first answer accepted") {
    transport.push(200, openai_reply("Emily"));
    const auto r = run_probe(task("en"), client, validator, session);
    CHECK(r.attempts.size() == 1);
    CHECK(r.name == "Emily");
  }
  SUBCASE("three refusals") {
    for (int i = 0; i < 3; ++i) transport.push(200, openai_reply("I cannot help with that request"));
    const auto r = run_probe(task("en"), client, validator, session);
    CHECK(r.attempts.size() == 3);
    CHECK(!r.name);
    CHECK(r.failure == RejectReason::non_name);
    CHECK(transport.requests().size() == 3);
  }
  SUBCASE("retry limit override") {
    for (int i = 0; i < 3; ++i) transport.push(200, openai_reply(""));
    const auto r = run_probe(task("en"), client, validator, session, 0);
    CHECK(r.attempts.size() == 1);
    CHECK(r.failure == RejectReason::empty);
  }
  SUBCASE("provider errors propagate") {
    transport.push(400, "bad request");
    CHECK_THROWS_AS(run_probe(task("en"), client, validator, session), ProviderError);
  }
}

TEST_CASE("generation record json") {
  GenerationRecord r;
  r.task = {"m", "en", DomainId::color, "pink", 4};
  r.attempts = {{0, "p", "no", 10, RejectReason::empty}, {1, "p", "Emily", 12, std::nullopt}};
  r.name = "Emily";
  r.started_at = "2025-01-01T00:00:00Z";
  const auto back = GenerationRecord::from_json(r.to_json());
  CHECK(back.same_outcome(r));
  CHECK(back.started_at == r.started_at);

  auto node = r.to_json();
  node["attempts"] = json::array();
  CHECK_THROWS_AS(GenerationRecord::from_json(node), ParseError);
  node = r.to_json();
  node.erase("outcome");
  CHECK_THROWS(GenerationRecord::from_json(node));
}

TEST_CASE("missing_count") {
  std::vector<ProbeTask> plan;
  std::vector<GenerationRecord> records;
  for (int t = 0; t < 10; ++t) {
    plan.push_back(task("en", t));
    GenerationRecord r;
    r.task = plan.back().key;
    r.attempts = {{0, "p", "Emily", 1, std::nullopt}};
    r.name = "Emily";
    if (t < 3) {
      r.name.reset();
      r.failure = RejectReason::non_name;
      r.attempts = {{0, "p", "x y z w", 1, RejectReason::non_name}};
    }
    if (t != 9) records.push_back(r);
  }
  CHECK(missing_count(records, plan) == 4);
  CHECK(missing_count({}, plan) == 10);
}
