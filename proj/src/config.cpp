#include <set>
#include <sstream>

#include "json_support.hpp"
#include "skewprobe/errors.hpp"
#include "skewprobe/runner.hpp"

namespace skewprobe {

using nlohmann::json;

namespace {

class Diagnostics {
 public:
  void add(std::string message) { messages_.push_back(std::move(message)); }
  void throw_if_any() const {
    if (messages_.empty()) return;
    std::ostringstream out;
    out << "invalid config (" << messages_.size() << " problem" << (messages_.size() == 1 ? "" : "s") << "):";
    for (const auto& m : messages_) out << "\n  - " << m;
    throw ValidationError(out.str());
  }

 private:
  std::vector<std::string> messages_;
};

void check_keys(const json& node, std::initializer_list<const char*> allowed, const std::string& where,
                Diagnostics& diag) {
  if (!node.is_object()) return;
  for (const auto& [key, value] : node.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) diag.add(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
std::optional<T> get_opt(const json& node, const char* key, const std::string& where, Diagnostics& diag) {
  if (!node.contains(key) || node[key].is_null()) return std::nullopt;
  try {
    return node[key].get<T>();
  } catch (const json::exception&) {
    diag.add(where + "." + key + ": wrong type");
    return std::nullopt;
  }
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& text) {
  if (text.empty()) return {};
  std::filesystem::path p(text);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

OracleEndpoint default_oracle(OracleId id) {
  OracleEndpoint e;
  e.id = id;
  if (id == OracleId::A) {
    e.api = OracleApi::genderize;
    e.base_url = "https://api.genderize.io";
    e.api_key_env = "GENDERIZE_API_KEY";
  } else {
    e.api = OracleApi::namsor;
    e.base_url = "https://v2.namsor.com/NamSorAPIv2/api2/json";
    e.api_key_env = "NAMSOR_API_KEY";
  }
  return e;
}

}  // namespace

PlanSpec RunConfig::plan_spec() const { return {model_ids(), languages, trials_per_category}; }

std::vector<std::string> RunConfig::model_ids() const {
  std::vector<std::string> ids;
  for (const auto& m : models) ids.push_back(m.model_id);
  return ids;
}

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json doc = detail::parse_json_document(json_text, "config");
  if (!doc.is_object()) throw ParseError("config: top level must be an object");
  Diagnostics diag;
  check_keys(doc,
             {"models", "oracles", "languages", "trials_per_category", "retry_limit", "max_name_tokens",
              "catalog_path", "template_path", "registry_path", "allowlist_path", "honorifics_path", "mode",
              "trace_path", "out_dir", "log_path"},
             "config", diag);

  RunConfig config;
  config.base_dir = base_dir;
  config.document = doc;

  if (!doc.contains("models") || !doc["models"].is_array() || doc["models"].empty()) {
    diag.add("config.models: expected a non-empty array");
  } else {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < doc["models"].size(); ++i) {
      const auto& node = doc["models"][i];
      const std::string where = "config.models[" + std::to_string(i) + "]";
      if (!node.is_object()) {
        diag.add(where + ": expected an object");
        continue;
      }
      check_keys(node,
                 {"model_id", "api_model", "base_url", "api_key_env", "wire", "max_in_flight",
                  "requests_per_minute", "decoding"},
                 where, diag);
      ProviderEndpoint e;
      e.model_id = get_opt<std::string>(node, "model_id", where, diag).value_or("");
      e.api_model = get_opt<std::string>(node, "api_model", where, diag).value_or("");
      e.base_url = get_opt<std::string>(node, "base_url", where, diag).value_or("");
      e.api_key_env = get_opt<std::string>(node, "api_key_env", where, diag).value_or("");
      e.max_in_flight = get_opt<int>(node, "max_in_flight", where, diag).value_or(1);
      e.requests_per_minute = get_opt<double>(node, "requests_per_minute", where, diag).value_or(60.0);
      if (auto wire = get_opt<std::string>(node, "wire", where, diag)) {
        try {
          e.wire = parse_wire_format(*wire);
        } catch (const ValidationError& err) {
          diag.add(where + ".wire: " + err.what());
        }
      }
      if (node.contains("decoding")) {
        const auto& d = node["decoding"];
        check_keys(d, {"temperature", "max_tokens"}, where + ".decoding", diag);
        e.decoding.temperature = get_opt<double>(d, "temperature", where + ".decoding", diag);
        e.decoding.max_tokens = get_opt<int>(d, "max_tokens", where + ".decoding", diag);
      }
      if (e.model_id.empty()) diag.add(where + ".model_id: required");
      if (e.base_url.empty()) diag.add(where + ".base_url: required");
      if (!ids.insert(e.model_id).second) diag.add(where + ".model_id: duplicate '" + e.model_id + "'");
      try {
        if (!e.model_id.empty()) e.validate();
      } catch (const ValidationError& err) {
        diag.add(err.what());
      }
      config.models.push_back(std::move(e));
    }
  }

  config.oracles = {default_oracle(OracleId::A), default_oracle(OracleId::B)};
  if (doc.contains("oracles")) {
    const auto& oracles = doc["oracles"];
    check_keys(oracles, {"A", "B", "max_in_flight"}, "config.oracles", diag);
    config.oracle_max_in_flight = get_opt<int>(oracles, "max_in_flight", "config.oracles", diag).value_or(1);
    if (config.oracle_max_in_flight < 1) diag.add("config.oracles.max_in_flight: must be >= 1");
    for (OracleId id : {OracleId::A, OracleId::B}) {
      const std::string key(to_string(id));
      if (!oracles.contains(key)) continue;
      const auto& node = oracles[key];
      const std::string where = "config.oracles." + key;
      check_keys(node, {"api", "base_url", "api_key_env", "requests_per_minute", "country_hints"}, where, diag);
      OracleEndpoint& e = config.oracles[id == OracleId::A ? 0 : 1];
      if (auto api = get_opt<std::string>(node, "api", where, diag)) {
        try {
          e.api = parse_oracle_api(*api);
        } catch (const ValidationError& err) {
          diag.add(where + ".api: " + err.what());
        }
      }
      if (auto v = get_opt<std::string>(node, "base_url", where, diag)) e.base_url = *v;
      if (auto v = get_opt<std::string>(node, "api_key_env", where, diag)) e.api_key_env = *v;
      if (auto v = get_opt<double>(node, "requests_per_minute", where, diag)) e.requests_per_minute = *v;
      if (!(e.requests_per_minute > 0)) diag.add(where + ".requests_per_minute: must be > 0");
      if (auto hints = get_opt<std::map<std::string, std::string>>(node, "country_hints", where, diag))
        e.country_hints = *hints;
    }
  }

  if (auto langs = get_opt<std::vector<std::string>>(doc, "languages", "config", diag)) {
    config.languages = *langs;
  }
  if (config.languages.empty()) diag.add("config.languages: expected a non-empty list of language codes");
  std::set<std::string> unique_langs(config.languages.begin(), config.languages.end());
  if (unique_langs.size() != config.languages.size()) diag.add("config.languages: duplicate language code");

  config.trials_per_category = get_opt<int>(doc, "trials_per_category", "config", diag).value_or(100);
  if (config.trials_per_category < 1) diag.add("config.trials_per_category: must be >= 1");
  config.retry_limit = get_opt<int>(doc, "retry_limit", "config", diag).value_or(kDefaultRetryLimit);
  if (config.retry_limit < 0 || config.retry_limit > 2) diag.add("config.retry_limit: must be in [0, 2]");
  const int max_tokens = get_opt<int>(doc, "max_name_tokens", "config", diag).value_or(3);
  if (max_tokens < 1) diag.add("config.max_name_tokens: must be >= 1");
  config.max_name_tokens = static_cast<std::size_t>(std::max(max_tokens, 1));

  const auto path_field = [&](const char* key, bool required) {
    auto text = get_opt<std::string>(doc, key, "config", diag);
    if (!text || text->empty()) {
      if (required) diag.add(std::string("config.") + key + ": required");
      return std::filesystem::path{};
    }
    return resolve_path(base_dir, *text);
  };
  config.catalog_path = path_field("catalog_path", true);
  config.template_path = path_field("template_path", true);
  config.registry_path = path_field("registry_path", true);
  config.allowlist_path = path_field("allowlist_path", false);
  config.honorifics_path = path_field("honorifics_path", false);
  config.trace_path = path_field("trace_path", true);
  config.out_dir = path_field("out_dir", true);
  config.log_path = path_field("log_path", false);
  if (config.log_path.empty() && !config.out_dir.empty()) config.log_path = config.out_dir / "run_log.jsonl";

  if (auto mode = get_opt<std::string>(doc, "mode", "config", diag)) {
    try {
      config.mode = parse_session_mode(*mode);
    } catch (const UsageError& err) {
      diag.add(std::string("config.mode: ") + err.what());
    }
  } else {
    diag.add("config.mode: required ('record' or 'replay')");
  }

  for (const auto* p : {&config.catalog_path, &config.template_path, &config.registry_path, &config.allowlist_path,
                        &config.honorifics_path}) {
    if (!p->empty() && !std::filesystem::exists(*p)) diag.add("file not found: " + p->string());
  }
  diag.throw_if_any();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  const auto absolute = std::filesystem::absolute(path);
  return parse_config(detail::read_text_file(absolute), absolute.parent_path());
}

std::string config_hash(const RunConfig& config) {
  json hashed = config.document;
  hashed.erase("out_dir");
  hashed.erase("log_path");
  hashed.erase("mode");
  json files = json::object();
  for (const auto& [key, path] : {std::pair{"catalog", config.catalog_path}, {"templates", config.template_path},
                                  {"registry", config.registry_path}, {"allowlist", config.allowlist_path},
                                  {"honorifics", config.honorifics_path}}) {
    if (!path.empty()) files[key] = detail::fnv1a_hex(detail::read_text_file(path));
  }
  hashed["__files"] = files;
  return detail::fnv1a_hex(hashed.dump());
}

}  // namespace skewprobe
