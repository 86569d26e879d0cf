#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcsim/controller.hpp"
#include "dcsim/timing.hpp"
#include "dcsim/workload.hpp"

namespace dcsim {

/// Where the records of a run come from. A non-empty `trace` wins over the
/// generator; unset generator fields fall back to the class defaults.
struct WorkloadSpec {
  WorkloadClass cls = WorkloadClass::LD;
  std::string trace;
  std::uint64_t records = 1'000'000;
  std::optional<std::uint64_t> working_set;
  std::optional<std::uint32_t> burst_len;
  std::optional<std::uint32_t> reuse_distance;
  std::optional<double> revisit_prob;
  std::optional<double> alias_prob;
  std::optional<double> mean_gap;
  std::optional<double> write_ratio;
  std::optional<std::uint32_t> cores;

  std::string label() const;
};

enum class OutputFormat { Json, Csv };

struct ExperimentConfig {
  ControllerConfig controller;
  DeviceTiming cache = DeviceTiming::cache_defaults();
  DeviceTiming memory = DeviceTiming::memory_defaults();
  WorkloadSpec workload;
  std::string output_path;  // empty: stdout
  OutputFormat output_format = OutputFormat::Json;

  /// Generator profile for the configured class, overrides applied.
  WorkloadProfile profile() const;
};

/// Raised when a config cannot be used; holds every problem found.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

inline constexpr const char* kEnvPrefix = "DCSIM_";

/// All accepted keys in document order.
const std::vector<std::string>& config_keys();

/// "cache.tcas" -> "DCSIM_CACHE_TCAS"
std::string env_name(const std::string& key);

/// Set one key from its text value. Returns an error message on failure.
std::optional<std::string> set_key(ExperimentConfig& cfg,
                                   const std::string& key,
                                   const std::string& value);

/// Apply "section.key = value" lines on top of `cfg`. '#' starts a comment.
/// Problems are appended to `errors` and parsing continues.
void apply_config_text(ExperimentConfig& cfg, std::istream& in,
                       const std::string& source,
                       std::vector<std::string>& errors);

/// Apply DCSIM_* environment variables; unknown DCSIM_ names are errors.
void apply_env_overrides(ExperimentConfig& cfg,
                         std::vector<std::string>& errors);

/// Semantic checks; returns every violation, each prefixed by its key path.
std::vector<std::string> validate(const ExperimentConfig& cfg);

/// Read file, apply env overrides, validate. Throws ConfigError, or
/// std::ios_base::failure if the file cannot be opened.
ExperimentConfig load_config(const std::string& path, bool use_env = true);

/// Flat key -> value document; feeding it back through set_key reproduces
/// the config exactly.
nlohmann::ordered_json config_json(const ExperimentConfig& cfg);
void write_config_text(std::ostream& out, const ExperimentConfig& cfg);

}  // namespace dcsim
