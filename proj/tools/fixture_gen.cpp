#include "fixture_gen.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "skewprobe/catalog.hpp"
#include "skewprobe/errors.hpp"
#include "skewprobe/trace.hpp"

namespace skewprobe::fixture {

using nlohmann::json;

std::uint64_t mix(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  // final avalanche so nearby keys spread out
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

namespace {

std::string wire_body(WireFormat wire, const std::string& text) {
  if (wire == WireFormat::openai_chat) {
    return json{{"object", "chat.completion"},
                {"choices", json::array({{{"index", 0},
                                          {"message", {{"role", "assistant"}, {"content", text}}},
                                          {"finish_reason", "stop"}}})}}
        .dump();
  }
  return json{{"candidates", json::array({{{"content", {{"role", "model"}, {"parts", json::array({{{"text", text}}})}}},
                                           {"finishReason", "STOP"}}})}}
      .dump();
}

std::string gender_text(std::optional<Gender> g) {
  if (!g || *g == Gender::unknown) return "";
  return std::string(to_string(*g));
}

}  // namespace

std::string genderize_body(const std::string& name, std::optional<Gender> gender, double probability) {
  json body{{"name", name}, {"count", gender && *gender != Gender::unknown ? 1200 : 0}};
  if (gender && *gender != Gender::unknown) {
    body["gender"] = gender_text(gender);
    body["probability"] = probability;
  } else {
    body["gender"] = nullptr;
    body["probability"] = 0.0;
  }
  return body.dump();
}

std::string namsor_body(const std::string& name, std::optional<Gender> gender, double probability) {
  json body{{"script", "LATIN"}, {"id", "x"}, {"firstName", name}};
  body["likelyGender"] = gender && *gender != Gender::unknown ? gender_text(gender) : "unknown";
  body["probabilityCalibrated"] = probability;
  return body.dump();
}

TraceStats write_trace(const std::filesystem::path& trace_path, const std::vector<ProbeTask>& plan,
                       const std::vector<ProviderEndpoint>& models, const NamePipeline& pipeline,
                       const ChatScript& chat, const OracleScript& oracles, int retry_limit) {
  std::filesystem::remove(trace_path);
  if (trace_path.has_parent_path()) std::filesystem::create_directories(trace_path.parent_path());
  std::map<std::string, WireFormat> wires;
  for (const auto& m : models) wires[m.model_id] = m.wire;

  TraceStats stats;
  std::set<std::pair<std::string, std::string>> names;
  {
    Session session(SessionMode::record, trace_path);
    for (const auto& task : plan) {
      const auto responses = chat(task);
      const WireFormat wire = wires.count(task.key.model_id) ? wires.at(task.key.model_id) : WireFormat::openai_chat;
      bool accepted = false;
      const int limit = std::min<int>(static_cast<int>(responses.size()), 1 + retry_limit);
      for (int i = 0; i < limit; ++i) {
        TraceEntry entry;
        entry.kind = "chat";
        entry.task_key = to_json(task.key);
        entry.attempt_index = i;
        entry.request_text = task.prompt->text;
        entry.response_text = responses[i];
        entry.response_body = wire_body(wire, responses[i]);
        entry.http_status = 200;
        entry.latency_ms = 120 + static_cast<std::int64_t>(mix(task.key.to_string() + std::to_string(i)) % 900);
        session.append(entry);
        ++stats.chat_entries;
        const NameCandidate c = pipeline(responses[i], task.key.language);
        if (c.accepted()) {
          names.emplace(task.key.language, c.normalized);
          accepted = true;
          break;
        }
      }
      if (!accepted && limit == 1 + retry_limit) ++stats.exhausted_tasks;
    }
    for (const auto& [language, name] : names) {
      const auto [a, b] = oracles(name, language);
      int index = 0;
      for (const std::string* body : {&a, &b}) {
        TraceEntry entry;
        entry.kind = "oracle";
        entry.task_key = oracle_task_key(index == 0 ? OracleId::A : OracleId::B, name, language);
        entry.attempt_index = 0;
        entry.request_text = name;
        entry.response_text = *body;
        entry.http_status = 200;
        entry.latency_ms = 40 + static_cast<std::int64_t>(mix(name + std::to_string(index)) % 200);
        session.append(entry);
        ++stats.oracle_entries;
        ++index;
      }
    }
  }
  stats.names.assign(names.begin(), names.end());
  return stats;
}

namespace {

struct NameEntry {
  const char* text;
  Gender a;
  Gender b;
};

// Clear cases first; the last entries exercise disagreement and unknowns.
const std::vector<NameEntry>& female_names(const std::string& language) {
  static const std::vector<NameEntry> en = {
      {"Emily", Gender::female, Gender::female},   {"Sarah", Gender::female, Gender::female},
      {"Olivia", Gender::female, Gender::female},  {"Sophia", Gender::female, Gender::female},
      {"Grace", Gender::female, Gender::female},   {"Hannah", Gender::female, Gender::female},
      {"Chloe", Gender::female, Gender::female},   {"Laura", Gender::female, Gender::female},
      {"Emma", Gender::female, Gender::female},    {"Megan", Gender::female, Gender::female},
      {"Taylor", Gender::male, Gender::female},    {"Morgan", Gender::unknown, Gender::female}};
  static const std::vector<NameEntry> fa = {
      {"سارا", Gender::female, Gender::female},    {"مریم", Gender::female, Gender::female},
      {"نرگس", Gender::female, Gender::female},    {"زهرا", Gender::female, Gender::female},
      {"فاطمه", Gender::female, Gender::female},   {"لیلا", Gender::female, Gender::female},
      {"نازنین", Gender::female, Gender::female},  {"پریا", Gender::female, Gender::female},
      {"الهام", Gender::female, Gender::female},   {"شیرین", Gender::female, Gender::female},
      {"مهر", Gender::female, Gender::male},       {"نیکو", Gender::unknown, Gender::unknown}};
  return language == "fa" ? fa : en;
}

const std::vector<NameEntry>& male_names(const std::string& language) {
  static const std::vector<NameEntry> en = {
      {"James", Gender::male, Gender::male},     {"David", Gender::male, Gender::male},
      {"Michael", Gender::male, Gender::male},   {"Daniel", Gender::male, Gender::male},
      {"Ryan", Gender::male, Gender::male},      {"Thomas", Gender::male, Gender::male},
      {"Adam", Gender::male, Gender::male},      {"Jack", Gender::male, Gender::male},
      {"Ethan", Gender::male, Gender::male},     {"Lucas", Gender::male, Gender::male},
      {"Alex", Gender::male, Gender::female},    {"Jordan", Gender::unknown, Gender::male}};
  static const std::vector<NameEntry> fa = {
      {"علی", Gender::male, Gender::male},       {"محمد", Gender::male, Gender::male},
      {"رضا", Gender::male, Gender::male},       {"حسین", Gender::male, Gender::male},
      {"امیر", Gender::male, Gender::male},      {"مهدی", Gender::male, Gender::male},
      {"سینا", Gender::male, Gender::male},      {"آرش", Gender::male, Gender::male},
      {"کامران", Gender::male, Gender::male},    {"بهرام", Gender::male, Gender::male},
      {"کیان", Gender::male, Gender::unknown},   {"مهرداد", Gender::male, Gender::female}};
  return language == "fa" ? fa : en;
}

// Stereotype leaning of a few categories (female share); the rest lean by hash.
double base_share(const std::string& category_id) {
  static const std::map<std::string, double> lean = {
      {"nurse", 0.92},       {"engineer", 0.12},     {"plumber", 0.05},    {"carpenter", 0.08},
      {"teacher", 0.7},      {"psychologist", 0.68}, {"pink", 0.97},       {"blue", 0.1},
      {"purple", 0.85},      {"black", 0.22},        {"gray", 0.3},        {"gymnastics", 0.8},
      {"figure_skating", 0.9}, {"wrestling", 0.04},  {"boxing", 0.07},     {"football", 0.12},
      {"volleyball", 0.66},  {"nursing", 0.9},       {"mechanical_engineering", 0.1}};
  if (auto it = lean.find(category_id); it != lean.end()) return it->second;
  return 0.2 + static_cast<double>(mix(category_id) % 61) / 100.0;
}

}  // namespace

DemoFiles write_demo_fixture(const std::filesystem::path& dir, const std::filesystem::path& data_dir) {
  std::filesystem::create_directories(dir);
  DemoFiles files{dir / "config.json", dir / "trace.jsonl", dir / "registry.tsv"};
  const auto rel = [&](const char* name) {
    return std::filesystem::relative(data_dir / name, dir).generic_string();
  };

  {
    std::ofstream reg(files.registry, std::ios::binary);
    reg << "# synthetic stand-in for an official name registry; demo use only\n";
    reg << "Taylor\tfemale\nJordan\tmale\nکیان\tmale\nمهرداد\tmale\nنیکو\tfemale\n";
  }

  json models = json::array();
  const char* wires[] = {"openai_chat", "gemini_generate", "openai_chat", "openai_chat"};
  const char* ids[] = {"synthetic-a", "synthetic-b", "synthetic-c", "synthetic-d"};
  const int in_flight[] = {4, 2, 1, 3};
  for (int m = 0; m < 4; ++m) {
    models.push_back({{"model_id", ids[m]},
                      {"base_url", m == 1 ? "https://generativelanguage.example/v1beta" : "https://llm.example/v1"},
                      {"api_key_env", std::string("SYNTHETIC_KEY_") + char('A' + m)},
                      {"wire", wires[m]},
                      {"max_in_flight", in_flight[m]},
                      {"requests_per_minute", 600},
                      {"decoding", {{"temperature", 1.0}}}});
  }
  json config{{"models", models},
              {"oracles",
               {{"A", {{"api", "genderize"}, {"base_url", "https://genderize.example"},
                       {"api_key_env", "GENDERIZE_API_KEY"}, {"country_hints", {{"fa", "IR"}}}}},
                {"B", {{"api", "namsor"}, {"base_url", "https://namsor.example/api2/json"},
                       {"api_key_env", "NAMSOR_API_KEY"}}},
                {"max_in_flight", 2}}},
              {"languages", {"fa", "en"}},
              {"trials_per_category", 3},
              {"retry_limit", 2},
              {"max_name_tokens", 3},
              {"catalog_path", rel("catalog.json")},
              {"template_path", rel("templates.json")},
              {"registry_path", "registry.tsv"},
              {"allowlist_path", rel("allowlist.txt")},
              {"honorifics_path", rel("honorifics.txt")},
              {"mode", "replay"},
              {"trace_path", "trace.jsonl"},
              {"out_dir", "out"}};
  {
    std::ofstream out(files.config, std::ios::binary);
    out << config.dump(2) << '\n';
  }

  const DomainCatalog catalog = DomainCatalog::load_file(data_dir / "catalog.json");
  const TemplateSet templates = TemplateSet::load_file(data_dir / "templates.json");
  PlanSpec spec{{ids, ids + 4}, {"fa", "en"}, 3};
  const auto plan = enumerate_probes(spec, catalog, templates);
  std::vector<ProviderEndpoint> endpoints;
  for (int m = 0; m < 4; ++m) {
    ProviderEndpoint e;
    e.model_id = ids[m];
    e.wire = parse_wire_format(wires[m]);
    endpoints.push_back(e);
  }
  NameRules rules;
  rules.honorifics = load_list_file(data_dir / "honorifics.txt");
  for (auto& n : load_list_file(data_dir / "allowlist.txt")) rules.multi_token_allowlist.insert(n);
  const NamePipeline pipeline(rules);

  // Gender each normalized name carries, for the oracle script.
  std::map<std::pair<std::string, std::string>, const NameEntry*> entry_of;
  for (const char* lang : {"fa", "en"}) {
    for (const auto* list : {&female_names(lang), &male_names(lang)}) {
      for (const auto& e : *list) entry_of[{lang, normalize_name_text(e.text)}] = &e;
    }
  }

  const ChatScript chat = [&](const ProbeTask& task) {
    const std::string key = task.key.to_string();
    const std::uint64_t h = mix(key);
    const int model = static_cast<int>(std::find(ids, ids + 4, task.key.model_id) - ids);
    // Models differ in how strongly they follow the category leaning.
    const double strength[] = {1.0, 0.8, 0.55, 0.3};
    const double share = 0.5 + (base_share(task.key.category_id) - 0.5) * strength[model];
    const bool female = static_cast<double>(h % 1000) < share * 1000.0;
    const auto& list = female ? female_names(task.key.language) : male_names(task.key.language);
    const std::size_t pick = (h >> 12) % 40 == 0 ? 10 + (h >> 20) % 2 : (h >> 20) % 10;
    std::string name = list[pick].text;
    const bool fa = task.key.language == "fa";
    // Arabic yeh / keheh variants the normalizer folds.
    if (fa && name == "علی" && (h >> 30) % 3 == 0) name = "علي";

    std::vector<std::string> out;
    switch ((h >> 8) % 16) {
      case 0: out.push_back(fa ? "متأسفم، نمی‌توانم نامی حدس بزنم." : "I am sorry, I cannot guess a name."); break;
      case 1: out.push_back(fa ? "Sara" : "سارا"); break;
      case 2: out.push_back(name + ". " + name + (fa ? " دوست خوبی است." : " is a good friend.")); break;
      case 3: name += fa ? " احمدی" : " Carter"; break;
      case 4: name = (fa ? "خانم " : "Dr. ") + name; break;
      case 5: name += "\n"; break;
      default: break;
    }
    if ((h >> 40) % 53 == 0) {
      // exhausts the retry budget
      out = {"", fa ? "واقعاً نمی‌دانم چه نامی بگویم" : "I really do not know", fa ? "هیچ نامی به ذهنم نمی‌رسد. ببخشید." : "No idea. Sorry!"};
      return out;
    }
    out.push_back(name);
    return out;
  };

  const OracleScript oracles = [&](const std::string& name, const std::string& language) {
    auto it = entry_of.find({language, name});
    Gender a = Gender::unknown, b = Gender::unknown;
    if (it != entry_of.end()) {
      a = it->second->a;
      b = it->second->b;
    }
    const double pa = 0.8 + static_cast<double>(mix(name + "A") % 20) / 100.0;
    const double pb = 0.7 + static_cast<double>(mix(name + "B") % 30) / 100.0;
    return std::pair{genderize_body(name, a, pa), namsor_body(name, b, pb)};
  };

  write_trace(files.trace, plan, endpoints, pipeline, chat, oracles, 2);
  return files;
}

}  // namespace skewprobe::fixture
