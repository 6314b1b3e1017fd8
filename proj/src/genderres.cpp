#include "skewprobe/genderres.hpp"

#include <set>
#include <sstream>

#include "json_support.hpp"
#include "skewprobe/errors.hpp"
#include "skewprobe/namenorm.hpp"

namespace skewprobe {

using nlohmann::json;

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(OracleId id) { return id == OracleId::A ? "A" : "B"; }

std::string_view to_string(ResolvedLabel label) {
  switch (label) {
    case ResolvedLabel::male: return "male";
    case ResolvedLabel::female: return "female";
    case ResolvedLabel::unresolved: return "unresolved";
  }
  return "unresolved";
}

std::string_view to_string(ResolutionSource source) {
  switch (source) {
    case ResolutionSource::oracles_agree: return "oracles_agree";
    case ResolutionSource::registry_tiebreak: return "registry_tiebreak";
    case ResolutionSource::unresolved_disagreement: return "unresolved_disagreement";
    case ResolutionSource::unresolved_unknown: return "unresolved_unknown";
  }
  return "unresolved_unknown";
}

Gender parse_gender(std::string_view text) {
  if (text == "male") return Gender::male;
  if (text == "female") return Gender::female;
  if (text == "unknown") return Gender::unknown;
  throw ParseError("unknown gender label '" + std::string(text) + "'");
}

OracleId parse_oracle_id(std::string_view text) {
  if (text == "A") return OracleId::A;
  if (text == "B") return OracleId::B;
  throw ParseError("unknown oracle id '" + std::string(text) + "'");
}

ResolvedLabel parse_resolved_label(std::string_view text) {
  for (auto l : {ResolvedLabel::male, ResolvedLabel::female, ResolvedLabel::unresolved}) {
    if (to_string(l) == text) return l;
  }
  throw ParseError("unknown resolved label '" + std::string(text) + "'");
}

ResolutionSource parse_resolution_source(std::string_view text) {
  for (auto s : {ResolutionSource::oracles_agree, ResolutionSource::registry_tiebreak,
                 ResolutionSource::unresolved_disagreement, ResolutionSource::unresolved_unknown}) {
    if (to_string(s) == text) return s;
  }
  throw ParseError("unknown resolution source '" + std::string(text) + "'");
}

namespace {

ResolvedLabel to_resolved(Gender g) {
  return g == Gender::male ? ResolvedLabel::male : g == Gender::female ? ResolvedLabel::female
                                                                       : ResolvedLabel::unresolved;
}

json verdict_json(const OracleVerdict& v) {
  json node{{"oracle_id", std::string(to_string(v.oracle))}, {"label", std::string(to_string(v.label))}};
  node["confidence"] = v.confidence ? json(*v.confidence) : json(nullptr);
  return node;
}

OracleVerdict verdict_from_json(const json& node) {
  OracleVerdict v;
  v.oracle = parse_oracle_id(node.at("oracle_id").get<std::string>());
  v.label = parse_gender(node.at("label").get<std::string>());
  if (node.contains("confidence") && !node["confidence"].is_null()) v.confidence = node["confidence"].get<double>();
  return v;
}

}  // namespace

json GenderResolution::to_json() const {
  json node{{"name", name},
            {"language", language},
            {"label", std::string(skewprobe::to_string(label))},
            {"source", std::string(skewprobe::to_string(source))},
            {"verdicts", json::array({verdict_json(verdicts.first), verdict_json(verdicts.second)})}};
  node["registry_hit"] = registry_hit ? json(std::string(skewprobe::to_string(*registry_hit))) : json(nullptr);
  return node;
}

GenderResolution GenderResolution::from_json(const json& node) {
  const std::string where = "gender resolution";
  GenderResolution r;
  r.name = detail::require_string(node, "name", where);
  r.language = detail::require_string(node, "language", where);
  r.label = parse_resolved_label(detail::require_string(node, "label", where));
  r.source = parse_resolution_source(detail::require_string(node, "source", where));
  const auto& verdicts = detail::require(node, "verdicts", where);
  if (!verdicts.is_array() || verdicts.size() != 2) throw ParseError(where + ".verdicts: expected two verdicts");
  r.verdicts = {verdict_from_json(verdicts[0]), verdict_from_json(verdicts[1])};
  if (node.contains("registry_hit") && !node["registry_hit"].is_null())
    r.registry_hit = parse_gender(node["registry_hit"].get<std::string>());
  check_invariants(r);
  return r;
}

void check_invariants(const GenderResolution& r) {
  const auto fail = [&](const std::string& what) {
    throw ValidationError("resolution of '" + r.name + "': " + what);
  };
  const Gender a = r.verdicts.first.label;
  const Gender b = r.verdicts.second.label;
  for (const auto& v : {r.verdicts.first, r.verdicts.second}) {
    if (v.label == Gender::unknown && v.confidence && *v.confidence != 0.0)
      fail("unknown verdict carries a confidence");
  }
  switch (r.source) {
    case ResolutionSource::oracles_agree:
      if (a != b || a == Gender::unknown || to_resolved(a) != r.label) fail("oracles_agree without agreement");
      break;
    case ResolutionSource::registry_tiebreak:
      if (a == b && a != Gender::unknown) fail("registry tie-break while oracles agree");
      if (!r.registry_hit || to_resolved(*r.registry_hit) != r.label) fail("tie-break label differs from registry");
      break;
    case ResolutionSource::unresolved_disagreement:
    case ResolutionSource::unresolved_unknown:
      if (r.label != ResolvedLabel::unresolved) fail("unresolved source with a resolved label");
      break;
  }
  if (r.label == ResolvedLabel::unresolved && r.source != ResolutionSource::unresolved_disagreement &&
      r.source != ResolutionSource::unresolved_unknown)
    fail("unresolved label with a resolving source");
}

Registry Registry::parse(std::string_view tsv_text, std::string provenance) {
  Registry registry;
  registry.provenance_ = std::move(provenance);
  std::istringstream in{std::string(tsv_text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("registry line " + std::to_string(line_no) + ": expected name<TAB>gender");
    const std::string gender_text = line.substr(tab + 1);
    Gender gender;
    if (gender_text == "male") {
      gender = Gender::male;
    } else if (gender_text == "female") {
      gender = Gender::female;
    } else {
      throw ParseError("registry line " + std::to_string(line_no) + ": gender must be male or female");
    }
    registry.add(line.substr(0, tab), gender);
  }
  return registry;
}

Registry Registry::load_file(const std::filesystem::path& path) {
  return parse(detail::read_text_file(path), path.filename().string());
}

void Registry::add(std::string_view name, Gender gender) {
  if (gender == Gender::unknown) throw ValidationError("registry entries must be male or female");
  std::string key = normalize_name_text(name);
  if (key.empty()) throw ValidationError("registry entry with empty name");
  auto [it, inserted] = entries_.try_emplace(key, gender);
  if (!inserted && it->second != gender)
    throw ValidationError("registry: conflicting genders for name '" + key + "'");
}

std::optional<Gender> Registry::lookup(std::string_view name) const {
  auto it = entries_.find(normalize_name_text(name));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

GenderResolution resolve(std::string_view name, std::string_view language, const OracleVerdict& a,
                         const OracleVerdict& b, const Registry& registry) {
  GenderResolution r;
  r.name = std::string(name);
  r.language = std::string(language);
  r.verdicts = {a, b};
  if (a.label == b.label && a.label != Gender::unknown) {
    r.label = to_resolved(a.label);
    r.source = ResolutionSource::oracles_agree;
    return r;
  }
  r.registry_hit = registry.lookup(name);
  if (r.registry_hit) {
    r.label = to_resolved(*r.registry_hit);
    r.source = ResolutionSource::registry_tiebreak;
    return r;
  }
  const bool unknown_involved = a.label == Gender::unknown || b.label == Gender::unknown;
  r.label = ResolvedLabel::unresolved;
  r.source = unknown_involved ? ResolutionSource::unresolved_unknown : ResolutionSource::unresolved_disagreement;
  return r;
}

Rate disagreement_rate(std::span<const GenderResolution> resolutions, std::string_view language) {
  std::map<std::string, bool> unique;
  for (const auto& r : resolutions) {
    if (r.language != language) continue;
    auto [it, inserted] = unique.try_emplace(r.name, r.oracles_differ());
    if (!inserted) it->second = it->second || r.oracles_differ();
  }
  if (unique.empty())
    throw MetricError("disagreement rate undefined: no names for language '" + std::string(language) + "'");
  Rate rate;
  rate.denominator = unique.size();
  for (const auto& [name, differs] : unique) rate.numerator += differs ? 1 : 0;
  return rate;
}

std::string_view to_string(OracleApi api) { return api == OracleApi::genderize ? "genderize" : "namsor"; }

OracleApi parse_oracle_api(std::string_view text) {
  if (text == "genderize") return OracleApi::genderize;
  if (text == "namsor") return OracleApi::namsor;
  throw ValidationError("unknown oracle api '" + std::string(text) + "'");
}

HttpRequest build_oracle_request(const OracleEndpoint& endpoint, std::string_view name, std::string_view language,
                                 std::string_view api_key) {
  std::string base = endpoint.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  HttpRequest request;
  request.method = "GET";
  auto hint = endpoint.country_hints.find(std::string(language));
  if (endpoint.api == OracleApi::genderize) {
    request.url = base + "/?name=" + url_encode(name);
    if (hint != endpoint.country_hints.end()) request.url += "&country_id=" + url_encode(hint->second);
    if (!api_key.empty()) request.url += "&apikey=" + url_encode(api_key);
  } else {
    request.url = base + "/gender/" + url_encode(name);
    if (hint != endpoint.country_hints.end()) request.url = base + "/genderGeo/" + url_encode(name) + "/" + url_encode(hint->second);
    if (!api_key.empty()) request.headers.emplace_back("X-API-KEY", std::string(api_key));
  }
  return request;
}

OracleVerdict parse_oracle_response(const OracleEndpoint& endpoint, std::string_view body) {
  json doc;
  try {
    doc = json::parse(body.begin(), body.end());
  } catch (const json::parse_error& e) {
    throw OracleError(std::string("malformed oracle response: ") + e.what());
  }
  OracleVerdict verdict;
  verdict.oracle = endpoint.id;
  const char* label_key = endpoint.api == OracleApi::genderize ? "gender" : "likelyGender";
  const char* confidence_key = endpoint.api == OracleApi::genderize ? "probability" : "probabilityCalibrated";
  if (!doc.is_object()) throw OracleError("oracle response is not an object");
  const auto label = doc.contains(label_key) && doc[label_key].is_string() ? doc[label_key].get<std::string>() : "";
  if (label == "male") {
    verdict.label = Gender::male;
  } else if (label == "female") {
    verdict.label = Gender::female;
  }
  if (verdict.label != Gender::unknown && doc.contains(confidence_key) && doc[confidence_key].is_number()) {
    const double c = doc[confidence_key].get<double>();
    if (c >= 0.0 && c <= 1.0) verdict.confidence = c;
  }
  return verdict;
}

json oracle_task_key(OracleId id, std::string_view name, std::string_view language) {
  return {{"oracle", std::string(to_string(id))}, {"name", name}, {"language", language}};
}

OracleClient::OracleClient(OracleEndpoint endpoint, HttpTransport& transport, Clock& clock,
                           TransportRetryPolicy policy)
    : endpoint_(std::move(endpoint)),
      transport_(&transport),
      clock_(&clock),
      policy_(policy),
      limiter_(endpoint_.requests_per_minute, clock) {}

OracleVerdict OracleClient::query(std::string_view name, std::string_view language, Session& session) {
  std::pair<std::string, std::string> cache_key{std::string(name), std::string(language)};
  {
    std::shared_lock lock(cache_mutex_);
    if (auto it = cache_.find(cache_key); it != cache_.end()) return it->second;
  }

  const json task_key = oracle_task_key(endpoint_.id, name, language);
  std::string body;
  if (auto entry = session.find("oracle", task_key, 0)) {
    body = entry->response_text;
  } else if (session.mode() == SessionMode::replay) {
    throw ReplayError("replay miss for oracle " + std::string(to_string(endpoint_.id)) + " name '" +
                      std::string(name) + "' (" + std::string(language) + ")");
  } else {
    std::string api_key;
    try {
      api_key = read_credential(endpoint_.api_key_env);
    } catch (const ProviderError& e) {
      throw OracleError(e.what());
    }
    const HttpRequest request = build_oracle_request(endpoint_, name, language, api_key);
    limiter_.acquire();
    const auto started = clock_->now();
    HttpResponse response;
    try {
      response = send_with_retries(*transport_, request, *clock_, policy_,
                                   "oracle " + std::string(to_string(endpoint_.id)));
    } catch (const ProviderError& e) {
      throw OracleError(e.what());
    }
    TraceEntry entry;
    entry.kind = "oracle";
    entry.task_key = task_key;
    entry.attempt_index = 0;
    entry.request_text = std::string(name);
    entry.response_text = response.body;
    entry.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(clock_->now() - started).count();
    entry.http_status = response.status;
    // Validate before recording so a malformed body is not cached in the trace.
    parse_oracle_response(endpoint_, response.body);
    session.append(entry);
    body = response.body;
  }

  OracleVerdict verdict = parse_oracle_response(endpoint_, body);
  std::unique_lock lock(cache_mutex_);
  return cache_.try_emplace(std::move(cache_key), verdict).first->second;
}

std::size_t OracleClient::cache_size() const {
  std::shared_lock lock(cache_mutex_);
  return cache_.size();
}

}  // namespace skewprobe
