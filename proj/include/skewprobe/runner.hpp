#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skewprobe/catalog.hpp"
#include "skewprobe/genderres.hpp"
#include "skewprobe/namenorm.hpp"
#include "skewprobe/prompting.hpp"
#include "skewprobe/provider.hpp"
#include "skewprobe/trace.hpp"

namespace skewprobe {

struct RunConfig {
  std::vector<ProviderEndpoint> models;
  std::array<OracleEndpoint, 2> oracles;
  int oracle_max_in_flight = 1;
  std::vector<LanguageCode> languages;
  int trials_per_category = 100;
  int retry_limit = kDefaultRetryLimit;
  std::size_t max_name_tokens = 3;
  std::filesystem::path catalog_path;
  std::filesystem::path template_path;
  std::filesystem::path registry_path;
  std::filesystem::path allowlist_path;   // optional
  std::filesystem::path honorifics_path;  // optional; built-in list when empty
  SessionMode mode = SessionMode::replay;
  std::filesystem::path trace_path;
  std::filesystem::path out_dir;
  std::filesystem::path log_path;  // defaults to <out_dir>/run_log.jsonl

  // Directory relative paths were resolved against, and the document as written.
  std::filesystem::path base_dir;
  nlohmann::json document;

  PlanSpec plan_spec() const;
  std::vector<std::string> model_ids() const;
};

// Parses and validates a config document. Relative paths resolve against base_dir.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

// Hash of everything that affects results: the config minus out_dir, log_path
// and mode, plus the contents of every referenced data file.
std::string config_hash(const RunConfig& config);

struct RunInputs {
  DomainCatalog catalog;
  TemplateSet templates;
  Registry registry;
  NameRules rules;
  std::vector<ProbeTask> plan;
};

RunInputs load_inputs(const RunConfig& config);

// Line-delimited run log: one header, then generation / resolution / aborted lines.
struct RunLogContents {
  nlohmann::json header;
  std::string config_hash;
  std::vector<GenerationRecord> records;
  std::vector<GenderResolution> resolutions;
  std::vector<std::string> aborted;
  // A trailing partial line left by an interrupted writer.
  bool truncated_tail = false;
};

RunLogContents read_run_log(const std::filesystem::path& path);

class RunLogWriter {
 public:
  // truncate=true starts a fresh log.
  RunLogWriter(const std::filesystem::path& path, std::string config_hash, bool truncate);
  ~RunLogWriter();
  RunLogWriter(const RunLogWriter&) = delete;
  RunLogWriter& operator=(const RunLogWriter&) = delete;

  void write_header(const RunConfig& config);
  void write(const GenerationRecord& record);
  void write(const GenderResolution& resolution);
  void write_aborted(const TaskKey& key, const std::string& error);

 private:
  void write_line(nlohmann::json line);
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

enum class Verbosity { quiet, normal, verbose };

struct RunEnvironment {
  // Transport used in record mode; replay always uses OfflineTransport.
  std::function<std::unique_ptr<HttpTransport>()> transport_factory;
  Clock* clock = &SystemClock::instance();
  TransportRetryPolicy retry;
  std::ostream* diagnostics = nullptr;  // stderr when null
  Verbosity verbosity = Verbosity::normal;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitIncomplete = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitRefused = 3;

struct RunResult {
  int exit_code = kExitOk;
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t oracle_queries = 0;
  std::vector<std::string> aborted_tasks;
  std::vector<std::string> unresolved_names;
  std::vector<std::filesystem::path> outputs;
};

RunResult cmd_run(const RunConfig& config, const RunEnvironment& env);
RunResult cmd_resume(const RunConfig& config, const std::filesystem::path& log_path, const RunEnvironment& env);
RunResult cmd_report(const std::filesystem::path& log_path, const std::filesystem::path& out_dir,
                     const RunEnvironment& env);
// Loads the config and all referenced data; prints the plan size.
int cmd_validate(const std::filesystem::path& config_path, const RunEnvironment& env);

}  // namespace skewprobe
