#pragma once

// Synthetic replay traces: scripted model responses and oracle bodies written
// in the same trace format a recorded run produces.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "skewprobe/genderres.hpp"
#include "skewprobe/namenorm.hpp"
#include "skewprobe/prompting.hpp"
#include "skewprobe/provider.hpp"

namespace skewprobe::fixture {

// Raw responses for attempts 0, 1, ... of one task. Attempts past the first
// accepted name are not written.
using ChatScript = std::function<std::vector<std::string>(const ProbeTask&)>;
// Response bodies of oracle A and oracle B for one normalized name.
using OracleScript = std::function<std::pair<std::string, std::string>(const std::string& name,
                                                                       const std::string& language)>;

struct TraceStats {
  std::size_t chat_entries = 0;
  std::size_t oracle_entries = 0;
  std::size_t exhausted_tasks = 0;
  std::vector<std::pair<std::string, std::string>> names;  // (language, name), sorted unique
};

// Overwrites trace_path.
TraceStats write_trace(const std::filesystem::path& trace_path, const std::vector<ProbeTask>& plan,
                       const std::vector<ProviderEndpoint>& models, const NamePipeline& pipeline,
                       const ChatScript& chat, const OracleScript& oracles, int retry_limit = kDefaultRetryLimit);

std::string genderize_body(const std::string& name, std::optional<Gender> gender, double probability);
std::string namsor_body(const std::string& name, std::optional<Gender> gender, double probability);

// 64-bit FNV-1a, used to spread scripted choices deterministically.
std::uint64_t mix(std::string_view text);

// The bundled demo: scripted names with per-category skew, a few invalid
// answers, exhausted tasks and oracle disagreements.
struct DemoFiles {
  std::filesystem::path config;
  std::filesystem::path trace;
  std::filesystem::path registry;
};
DemoFiles write_demo_fixture(const std::filesystem::path& dir, const std::filesystem::path& data_dir);

}  // namespace skewprobe::fixture
