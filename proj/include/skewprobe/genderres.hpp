#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include <nlohmann/json.hpp>

#include "skewprobe/provider.hpp"
#include "skewprobe/trace.hpp"
#include "skewprobe/transport.hpp"

namespace skewprobe {

enum class Gender { male, female, unknown };
enum class OracleId { A, B };
enum class ResolvedLabel { male, female, unresolved };
enum class ResolutionSource { oracles_agree, registry_tiebreak, unresolved_disagreement, unresolved_unknown };

std::string_view to_string(Gender g);
std::string_view to_string(OracleId id);
std::string_view to_string(ResolvedLabel label);
std::string_view to_string(ResolutionSource source);
Gender parse_gender(std::string_view text);
OracleId parse_oracle_id(std::string_view text);
ResolvedLabel parse_resolved_label(std::string_view text);
ResolutionSource parse_resolution_source(std::string_view text);

struct OracleVerdict {
  OracleId oracle = OracleId::A;
  Gender label = Gender::unknown;
  // Recorded only; resolution never reads it.
  std::optional<double> confidence;

  bool operator==(const OracleVerdict&) const = default;
};

struct GenderResolution {
  std::string name;
  std::string language;
  ResolvedLabel label = ResolvedLabel::unresolved;
  ResolutionSource source = ResolutionSource::unresolved_unknown;
  std::pair<OracleVerdict, OracleVerdict> verdicts;
  std::optional<Gender> registry_hit;

  bool operator==(const GenderResolution&) const = default;
  // True when the two oracle labels differ (unknown differs from male/female).
  bool oracles_differ() const { return verdicts.first.label != verdicts.second.label; }

  nlohmann::json to_json() const;
  static GenderResolution from_json(const nlohmann::json& node);
};

// Throws ValidationError if the resolution breaks a label/source invariant.
void check_invariants(const GenderResolution& resolution);

// Local stand-in for the official name registry.
class Registry {
 public:
  Registry() = default;

  // Lines "name<TAB>gender"; '#' comments and blank lines ignored.
  static Registry parse(std::string_view tsv_text, std::string provenance);
  static Registry load_file(const std::filesystem::path& path);

  // Name is normalized before lookup.
  std::optional<Gender> lookup(std::string_view name) const;
  void add(std::string_view name, Gender gender);

  std::size_t size() const { return entries_.size(); }
  const std::string& provenance() const { return provenance_; }

 private:
  std::map<std::string, Gender, std::less<>> entries_;
  std::string provenance_;
};

GenderResolution resolve(std::string_view name, std::string_view language, const OracleVerdict& a,
                         const OracleVerdict& b, const Registry& registry);

struct Rate {
  std::size_t numerator = 0;
  std::size_t denominator = 0;
  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

// Over unique names of one language. Throws MetricError when none are in scope.
Rate disagreement_rate(std::span<const GenderResolution> resolutions, std::string_view language);

enum class OracleApi { genderize, namsor };

std::string_view to_string(OracleApi api);
OracleApi parse_oracle_api(std::string_view text);

struct OracleEndpoint {
  OracleId id = OracleId::A;
  OracleApi api = OracleApi::genderize;
  std::string base_url;
  std::string api_key_env;
  double requests_per_minute = 60.0;
  // Optional per-language country hint (e.g. fa -> IR).
  std::map<std::string, std::string> country_hints;
};

HttpRequest build_oracle_request(const OracleEndpoint& endpoint, std::string_view name, std::string_view language,
                                 std::string_view api_key);
// Parses a verbatim response body into a verdict.
OracleVerdict parse_oracle_response(const OracleEndpoint& endpoint, std::string_view body);

// Verdicts are cached by (name, language); the cache allows concurrent reads.
class OracleClient {
 public:
  OracleClient(OracleEndpoint endpoint, HttpTransport& transport, Clock& clock = SystemClock::instance(),
               TransportRetryPolicy policy = {});

  OracleVerdict query(std::string_view name, std::string_view language, Session& session);

  const OracleEndpoint& endpoint() const { return endpoint_; }
  std::size_t cache_size() const;

 private:
  OracleEndpoint endpoint_;
  HttpTransport* transport_;
  Clock* clock_;
  TransportRetryPolicy policy_;
  RateLimiter limiter_;
  mutable std::shared_mutex cache_mutex_;
  std::map<std::pair<std::string, std::string>, OracleVerdict> cache_;
};

nlohmann::json oracle_task_key(OracleId id, std::string_view name, std::string_view language);

}  // namespace skewprobe
