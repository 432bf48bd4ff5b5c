#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tunescape/cache.hpp"
#include "tunescape/observation.hpp"
#include "tunescape/space.hpp"

namespace tunescape {

enum class BackendKind { simulated, command };

struct BackendDescriptor {
  BackendKind kind = BackendKind::simulated;

  // simulated: the cache to replay.
  std::filesystem::path source_cache;

  // command: `{param}` placeholders are replaced by configuration values. The optional compile
  // step runs once per configuration before any timed run.
  std::string command_template;
  std::string compile_template;
  std::filesystem::path working_directory;
  std::map<std::string, std::string> environment;
  // Required when the template contains no placeholder.
  bool parameterless = false;
  // The program performs warmup and benchmark repeats itself and prints one TUNE_TIME_MS line per
  // repeat; it is launched once per configuration.
  bool self_repeating = false;
};

// A measurement backend. Implementations never throw for failures of the configuration itself;
// those are encoded in Observation::status.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Observation measure(const Configuration& config, const MeasurementProtocol& protocol) = 0;
  // True when concurrent measure() calls cannot disturb each other's timings.
  virtual bool concurrent_safe() const { return false; }
};

// Returns the stored observation verbatim. Throws MissingEntry when the key has no record.
Observation simulated_lookup(const TuningCache& cache, const std::string& key);

// Replays a recorded cache.
class SimulatedBackend final : public Backend {
 public:
  // Throws SpaceMismatch if the cache does not belong to `space`.
  SimulatedBackend(TuningCache cache, const SearchSpaceSpec& space);

  // Throws MissingEntry for configurations absent from the source cache.
  Observation measure(const Configuration& config, const MeasurementProtocol& protocol) override;
  bool concurrent_safe() const override { return true; }
  const TuningCache& source() const noexcept { return cache_; }

 private:
  TuningCache cache_;
  const SearchSpaceSpec& space_;
};

// Result of one child process.
struct ProcessResult {
  int exit_code = 0;
  bool timed_out = false;
  bool launch_failed = false;
  std::string standard_output;
  std::string standard_error;
};

// Launches argv[0] (PATH lookup) with the given environment overrides and working directory,
// killing it when `timeout` expires.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& working_directory,
                          const std::map<std::string, std::string>& environment,
                          std::chrono::milliseconds timeout);

// Splits a command template on whitespace (double quotes group words) and substitutes `{name}`
// placeholders. Throws std::invalid_argument for unknown placeholders.
std::vector<std::string> expand_command(const std::string& command_template,
                                        const SearchSpaceSpec& space, const Configuration& config);

// Every `TUNE_TIME_MS <float>` line of `output`, in order. Throws std::invalid_argument on a
// malformed line.
std::vector<double> parse_tune_times(const std::string& output);

Observation command_execute(const BackendDescriptor& descriptor, const SearchSpaceSpec& space,
                            const Configuration& config, const MeasurementProtocol& protocol);

class CommandBackend final : public Backend {
 public:
  // Throws std::invalid_argument for templates without placeholders (unless parameterless) or
  // with placeholders naming no parameter.
  CommandBackend(BackendDescriptor descriptor, const SearchSpaceSpec& space);

  Observation measure(const Configuration& config, const MeasurementProtocol& protocol) override {
    return command_execute(descriptor_, space_, config, protocol);
  }

 private:
  BackendDescriptor descriptor_;
  const SearchSpaceSpec& space_;
};

// `space` must outlive the backend.
std::unique_ptr<Backend> make_backend(const BackendDescriptor& descriptor,
                                      const SearchSpaceSpec& space);

}  // namespace tunescape
