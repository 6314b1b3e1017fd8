#include "skewprobe/runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json_support.hpp"
#include "skewprobe/errors.hpp"
#include "skewprobe/metrics.hpp"
#include "skewprobe/report.hpp"

namespace skewprobe {

using nlohmann::json;

RunInputs load_inputs(const RunConfig& config) {
  RunInputs in;
  in.catalog = DomainCatalog::load_file(config.catalog_path);
  for (const auto& language : config.languages) {
    if (!in.catalog.has_language(language))
      throw ValidationError("language '" + language + "' is not in catalog " + config.catalog_path.string());
  }
  in.templates = TemplateSet::load_file(config.template_path);
  in.registry = Registry::load_file(config.registry_path);
  in.rules.max_tokens = config.max_name_tokens;
  in.rules.honorifics =
      config.honorifics_path.empty() ? NameRules::default_honorifics() : load_list_file(config.honorifics_path);
  if (!config.allowlist_path.empty()) {
    for (auto& entry : load_list_file(config.allowlist_path)) in.rules.multi_token_allowlist.insert(std::move(entry));
  }
  in.plan = enumerate_probes(config.plan_spec(), in.catalog, in.templates);
  return in;
}

// ---- run log -------------------------------------------------------------

RunLogContents read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SessionError("cannot read run log '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (text.empty()) throw SessionError("run log '" + path.string() + "' is empty");

  RunLogContents log;
  std::map<TaskKey, GenerationRecord> records;
  std::map<NameKey, GenderResolution> resolutions;
  std::set<std::string> aborted;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const bool complete_line = end != std::string::npos;
    const std::string line = text.substr(pos, complete_line ? end - pos : std::string::npos);
    pos = complete_line ? end + 1 : text.size();
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "run log line " + std::to_string(line_no);
    json node;
    try {
      node = json::parse(line);
    } catch (const json::parse_error&) {
      if (!complete_line) {
        log.truncated_tail = true;
        break;
      }
      throw ParseError(where + ": not valid JSON");
    }
    if (!node.is_object() || !node.contains("type") || !node["type"].is_string())
      throw ParseError(where + ": missing type");
    const std::string type = node["type"];
    const std::string hash = node.value("config_hash", "");
    if (line_no == 1) {
      if (type != "header") throw ParseError(where + ": first line must be the header");
      log.header = node;
      log.config_hash = hash;
      continue;
    }
    if (hash != log.config_hash) throw ParseError(where + ": config hash differs from the header");
    if (type == "generation") {
      GenerationRecord record = GenerationRecord::from_json(detail::require(node, "record", where));
      aborted.erase(record.task.to_string());
      records.insert_or_assign(record.task, std::move(record));
    } else if (type == "resolution") {
      GenderResolution r = GenderResolution::from_json(detail::require(node, "resolution", where));
      NameKey key{r.name, r.language};
      resolutions.try_emplace(std::move(key), std::move(r));
    } else if (type == "aborted") {
      const TaskKey key = task_key_from_json(detail::require(node, "task_key", where));
      if (!records.contains(key)) aborted.insert(key.to_string());
    } else {
      throw ParseError(where + ": unknown line type '" + type + "'");
    }
  }
  if (log.header.is_null()) throw SessionError("run log '" + path.string() + "' has no header");
  for (auto& [key, record] : records) log.records.push_back(std::move(record));
  for (auto& [key, r] : resolutions) log.resolutions.push_back(std::move(r));
  log.aborted.assign(aborted.begin(), aborted.end());
  return log;
}

struct RunLogWriter::Impl {
  std::filesystem::path path;
  std::string hash;
  std::mutex mutex;
  std::ofstream out;
};

RunLogWriter::RunLogWriter(const std::filesystem::path& path, std::string config_hash, bool truncate)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  impl_->hash = std::move(config_hash);
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (!truncate && std::filesystem::exists(path)) {
    // Drop a partial last line so appended lines start clean.
    std::string text = detail::read_text_file(path);
    const std::size_t last = text.rfind('\n');
    const std::uintmax_t keep = last == std::string::npos ? 0 : last + 1;
    if (keep != text.size()) std::filesystem::resize_file(path, keep, ec);
    if (ec) throw SessionError("cannot trim run log '" + path.string() + "': " + ec.message());
  }
  impl_->out.open(path, std::ios::binary | (truncate ? std::ios::trunc : std::ios::app));
  if (!impl_->out) throw SessionError("run log not writable: '" + path.string() + "'");
}

RunLogWriter::~RunLogWriter() = default;

void RunLogWriter::write_line(json line) {
  line["config_hash"] = impl_->hash;
  const std::string text = line.dump(-1, ' ', false, json::error_handler_t::replace);
  std::lock_guard lock(impl_->mutex);
  impl_->out << text << '\n';
  impl_->out.flush();
  if (!impl_->out) throw SessionError("write to run log '" + impl_->path.string() + "' failed");
}

void RunLogWriter::write_header(const RunConfig& config) {
  write_line({{"type", "header"},
              {"format", 1},
              {"config", config.document},
              {"base_dir", config.base_dir.string()},
              {"created_at", iso8601_now()}});
}

void RunLogWriter::write(const GenerationRecord& record) {
  write_line({{"type", "generation"}, {"record", record.to_json()}});
}

void RunLogWriter::write(const GenderResolution& resolution) {
  write_line({{"type", "resolution"}, {"resolution", resolution.to_json()}});
}

void RunLogWriter::write_aborted(const TaskKey& key, const std::string& error) {
  write_line({{"type", "aborted"}, {"task_key", to_json(key)}, {"error", error}});
}

// ---- orchestration -------------------------------------------------------

namespace {

class Reporter {
 public:
  explicit Reporter(const RunEnvironment& env) : env_(env) {}

  std::ostream& out() const { return env_.diagnostics ? *env_.diagnostics : std::cerr; }
  void info(const std::string& message) const {
    if (env_.verbosity != Verbosity::quiet) line(message);
  }
  void detail(const std::string& message) const {
    if (env_.verbosity == Verbosity::verbose) line(message);
  }
  void error(const std::string& message) const { line("error: " + message); }

 private:
  void line(const std::string& message) const {
    std::lock_guard lock(mutex_);
    out() << message << '\n';
  }
  const RunEnvironment& env_;
  mutable std::mutex mutex_;
};

template <typename F>
void run_pool(std::size_t workers, std::size_t jobs, F&& job) {
  workers = std::min(workers, jobs);
  if (workers == 0) return;
  std::atomic<std::size_t> next{0};
  const auto loop = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) job(i);
  };
  if (workers == 1) {
    loop();
    return;
  }
  std::vector<std::jthread> threads;
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(loop);
}

RunMetadata make_metadata(const RunConfig& config, const RunInputs& inputs, const std::string& hash) {
  RunMetadata meta;
  meta.config_hash = hash;
  meta.trace_path = config.document.value("trace_path", "");
  meta.catalog_version = inputs.catalog.version();
  json models = json::array();
  for (const auto& m : config.models) models.push_back(m.model_id);
  meta.settings = {{"models", models},
                   {"languages", config.languages},
                   {"trials_per_category", config.trials_per_category},
                   {"retry_limit", config.retry_limit},
                   {"max_name_tokens", config.max_name_tokens},
                   {"honorifics", inputs.rules.honorifics.size()},
                   {"multi_token_allowlist", inputs.rules.multi_token_allowlist.size()},
                   {"registry", {{"provenance", inputs.registry.provenance()}, {"entries", inputs.registry.size()}}}};
  return meta;
}

std::vector<std::filesystem::path> emit_reports(const RunConfig& config, const RunInputs& inputs,
                                                const std::string& hash, std::span<const GenerationRecord> records,
                                                std::span<const GenderResolution> resolutions,
                                                const std::filesystem::path& out_dir, const Reporter& log,
                                                bool& partial) {
  const DomainSummary summary = domain_summary(inputs.plan, records, resolutions, inputs.catalog);
  const CoverageReport coverage = coverage_report(summary, resolutions, config.languages);
  auto outputs = emit_tables(summary, coverage, make_metadata(config, inputs, hash), out_dir);
  const auto ids = config.model_ids();
  auto figures = emit_figures(summary, inputs.catalog, config.languages, ids, out_dir);
  outputs.insert(outputs.end(), figures.begin(), figures.end());

  partial = !summary.absent_tasks.empty();
  if (partial) {
    log.error(std::to_string(summary.absent_tasks.size()) + " planned task(s) have no record; report is partial");
    for (const auto& key : summary.absent_tasks) log.info("  missing " + key.to_string());
  }
  log.info("valid " + std::to_string(coverage.valid) + " of " + std::to_string(coverage.planned) +
           " planned, failed " + std::to_string(coverage.failed) + ", unresolved " +
           std::to_string(coverage.unresolved));
  return outputs;
}

std::unique_ptr<HttpTransport> make_transport(const RunConfig& config, const RunEnvironment& env) {
  if (config.mode == SessionMode::replay) return std::make_unique<OfflineTransport>();
  if (env.transport_factory) return env.transport_factory();
  return std::make_unique<HttplibTransport>();
}

RunResult execute(const RunConfig& config, const RunInputs& inputs, const std::string& hash,
                  RunLogContents existing, RunLogWriter& writer, const RunEnvironment& env) {
  const Reporter log(env);
  RunResult result;
  Session session(config.mode, config.trace_path);
  const auto transport = make_transport(config, env);
  Clock& clock = *env.clock;

  std::set<TaskKey> done;
  for (const auto& r : existing.records) done.insert(r.task);
  std::vector<GenerationRecord> records = std::move(existing.records);
  std::mutex records_mutex;

  // Generation: one bounded pool per endpoint, all endpoints concurrently.
  const NamePipeline pipeline(inputs.rules);
  const NameValidator validator = [&pipeline](std::string_view raw, std::string_view language) {
    return pipeline(raw, language);
  };
  std::vector<std::unique_ptr<ChatClient>> clients;
  std::vector<std::vector<const ProbeTask*>> pending(config.models.size());
  std::map<std::string, std::size_t> model_index;
  for (std::size_t m = 0; m < config.models.size(); ++m) {
    clients.push_back(std::make_unique<ChatClient>(config.models[m], *transport, clock, env.retry));
    model_index[config.models[m].model_id] = m;
  }
  for (const auto& task : inputs.plan) {
    if (done.contains(task.key)) {
      ++result.skipped;
      continue;
    }
    pending[model_index.at(task.key.model_id)].push_back(&task);
  }
  std::mutex aborted_mutex;
  {
    std::vector<std::jthread> pools;
    for (std::size_t m = 0; m < config.models.size(); ++m) {
      if (pending[m].empty()) continue;
      pools.emplace_back([&, m] {
        const auto& tasks = pending[m];
        run_pool(static_cast<std::size_t>(config.models[m].max_in_flight), tasks.size(), [&](std::size_t i) {
          const ProbeTask& task = *tasks[i];
          try {
            GenerationRecord record = run_probe(task, *clients[m], validator, session, config.retry_limit);
            writer.write(record);
            log.detail(task.key.to_string() + " -> " +
                       (record.name ? *record.name : "failed(" + std::string(to_string(*record.failure)) + ")"));
            std::lock_guard lock(records_mutex);
            records.push_back(std::move(record));
            ++result.executed;
          } catch (const std::exception& e) {
            writer.write_aborted(task.key, e.what());
            log.error("task " + task.key.to_string() + " aborted: " + e.what());
            std::lock_guard lock(aborted_mutex);
            result.aborted_tasks.push_back(task.key.to_string());
          }
        });
      });
    }
  }
  std::sort(result.aborted_tasks.begin(), result.aborted_tasks.end());

  // Resolution runs after every generation has finished.
  std::set<NameKey> resolved;
  for (const auto& r : existing.resolutions) resolved.insert({r.name, r.language});
  std::vector<GenderResolution> resolutions = std::move(existing.resolutions);
  std::set<NameKey> to_resolve;
  for (const auto& r : records) {
    if (r.name && !resolved.contains({*r.name, r.task.language})) to_resolve.insert({*r.name, r.task.language});
  }
  const std::vector<NameKey> names(to_resolve.begin(), to_resolve.end());
  OracleClient oracle_a(config.oracles[0], *transport, clock, env.retry);
  OracleClient oracle_b(config.oracles[1], *transport, clock, env.retry);
  std::mutex resolutions_mutex;
  run_pool(static_cast<std::size_t>(config.oracle_max_in_flight), names.size(), [&](std::size_t i) {
    const NameKey& key = names[i];
    try {
      const OracleVerdict a = oracle_a.query(key.name, key.language, session);
      const OracleVerdict b = oracle_b.query(key.name, key.language, session);
      GenderResolution r = resolve(key.name, key.language, a, b, inputs.registry);
      writer.write(r);
      log.detail(key.language + "/" + key.name + " -> " + std::string(to_string(r.label)) + " (" +
                 std::string(to_string(r.source)) + ")");
      std::lock_guard lock(resolutions_mutex);
      resolutions.push_back(std::move(r));
      ++result.oracle_queries;
    } catch (const std::exception& e) {
      log.error("name " + key.language + "/" + key.name + " not resolved: " + e.what());
      std::lock_guard lock(resolutions_mutex);
      result.unresolved_names.push_back(key.language + "/" + key.name);
    }
  });
  std::sort(result.unresolved_names.begin(), result.unresolved_names.end());

  bool partial = false;
  result.outputs = emit_reports(config, inputs, hash, records, resolutions, config.out_dir, log, partial);
  log.info("executed " + std::to_string(result.executed) + " task(s), skipped " + std::to_string(result.skipped) +
           ", resolved " + std::to_string(result.oracle_queries) + " new name(s)");
  if (!result.aborted_tasks.empty()) {
    log.error(std::to_string(result.aborted_tasks.size()) + " task(s) aborted; rerun with resume");
  }
  if (!result.aborted_tasks.empty() || !result.unresolved_names.empty() || partial)
    result.exit_code = kExitIncomplete;
  return result;
}

RunResult fail(int code) {
  RunResult r;
  r.exit_code = code;
  return r;
}

}  // namespace

RunResult cmd_run(const RunConfig& config, const RunEnvironment& env) {
  const Reporter log(env);
  std::string hash;
  RunInputs inputs;
  try {
    inputs = load_inputs(config);
    hash = config_hash(config);
    if (config.mode == SessionMode::replay && !std::filesystem::exists(config.trace_path))
      throw SessionError("replay trace not found: '" + config.trace_path.string() + "'");
  } catch (const Error& e) {
    log.error(e.what());
    return fail(kExitInvalid);
  }
  log.info("plan: " + std::to_string(inputs.plan.size()) + " task(s)");
  try {
    RunLogWriter writer(config.log_path, hash, true);
    writer.write_header(config);
    return execute(config, inputs, hash, {}, writer, env);
  } catch (const Error& e) {
    log.error(e.what());
    return fail(kExitIncomplete);
  }
}

RunResult cmd_resume(const RunConfig& config, const std::filesystem::path& log_path, const RunEnvironment& env) {
  const Reporter log(env);
  std::string hash;
  RunInputs inputs;
  RunLogContents existing;
  try {
    inputs = load_inputs(config);
    hash = config_hash(config);
    existing = read_run_log(log_path);
  } catch (const Error& e) {
    log.error(e.what());
    return fail(kExitInvalid);
  }
  if (existing.config_hash != hash) {
    log.error("run log was written under a different configuration (hash " + existing.config_hash + ", now " +
              hash + "); refusing to resume");
    return fail(kExitRefused);
  }
  if (existing.truncated_tail) log.info("dropping a partial last line of the run log");
  try {
    RunLogWriter writer(log_path, hash, false);
    return execute(config, inputs, hash, std::move(existing), writer, env);
  } catch (const Error& e) {
    log.error(e.what());
    return fail(kExitIncomplete);
  }
}

RunResult cmd_report(const std::filesystem::path& log_path, const std::filesystem::path& out_dir,
                     const RunEnvironment& env) {
  const Reporter log(env);
  try {
    const RunLogContents contents = read_run_log(log_path);
    const json& header = contents.header;
    if (!header.contains("config") || !header.contains("base_dir"))
      throw ParseError("run log header lacks the configuration");
    const RunConfig config = parse_config(header["config"].dump(), header["base_dir"].get<std::string>());
    const RunInputs inputs = load_inputs(config);
    const std::string hash = config_hash(config);
    if (hash != contents.config_hash) {
      log.error("data files changed since the run (hash " + contents.config_hash + ", now " + hash + ")");
      return fail(kExitRefused);
    }
    if (contents.records.empty()) throw ReportError("run log has no generation records");
    RunResult result;
    bool partial = false;
    result.outputs =
        emit_reports(config, inputs, hash, contents.records, contents.resolutions, out_dir, log, partial);
    result.aborted_tasks = contents.aborted;
    if (partial) result.exit_code = kExitIncomplete;
    return result;
  } catch (const Error& e) {
    log.error(e.what());
    return fail(kExitInvalid);
  }
}

int cmd_validate(const std::filesystem::path& config_path, const RunEnvironment& env) {
  const Reporter log(env);
  try {
    const RunConfig config = load_config(config_path);
    const RunInputs inputs = load_inputs(config);
    if (config.mode == SessionMode::replay && !std::filesystem::exists(config.trace_path))
      throw SessionError("replay trace not found: '" + config.trace_path.string() + "'");
    log.info("config ok: " + std::to_string(config.models.size()) + " model(s), " +
             std::to_string(config.languages.size()) + " language(s), " + std::to_string(inputs.plan.size()) +
             " task(s), hash " + config_hash(config));
    return kExitOk;
  } catch (const Error& e) {
    log.error(e.what());
    return kExitInvalid;
  }
}

}  // namespace skewprobe
