#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tunescape/observation.hpp"
#include "tunescape/space.hpp"

namespace tunescape {

// Orders canonical configuration keys field by field: integer fields numerically, anything else
// lexicographically. For spaces whose value lists are ascending this equals canonical order.
struct ConfigKeyLess {
  bool operator()(std::string_view a, std::string_view b) const;
};

enum class Provenance { native, imported };

const char* to_string(Provenance provenance);

inline constexpr int kCacheSchemaVersion = 1;

// Recorded tuning outcomes for one kernel on one device.
struct TuningCache {
  std::string kernel_name;
  std::string device_name;
  std::string space_fingerprint;  // empty when not tied to a space
  std::vector<std::string> param_order;
  std::map<std::string, Observation, ConfigKeyLess> records;
  Provenance provenance = Provenance::native;
  std::map<std::string, std::string> metadata;

  // Creates an empty cache bound to `space`.
  static TuningCache for_space(const SearchSpaceSpec& space, std::string device_name);

  const Observation* find(std::string_view key) const;
  // Replaces any existing record with the same key.
  void insert(Observation observation);
  std::size_t ok_count() const;

  // Arity, key/config agreement, ok/timing consistency, finite positive times.
  void validate() const;
  // Throws SpaceMismatch if the cache was recorded against a different space.
  void check_space(const SearchSpaceSpec& space) const;

  bool operator==(const TuningCache&) const = default;
};

std::string serialize_cache(const TuningCache& cache);
TuningCache parse_cache(std::string_view text);

// Writes atomically (temporary file then rename).
void write_cache(const TuningCache& cache, const std::filesystem::path& path);
TuningCache read_cache(const std::filesystem::path& path);

// Options for ingesting the cache files written by the external auto-tuner.
struct ImportOptions {
  std::optional<SearchSpaceSpec> expected_space;
  // Matched case-insensitively as substrings of non-numeric time values, first match wins.
  std::vector<std::pair<std::string, Status>> failure_markers = default_failure_markers();
  std::string time_field = "time";
  std::string times_field = "times";
  // Entry field holding a higher-is-better metric, e.g. "GFLOP/s".
  std::optional<std::string> metric_field;
  // Multiplier converting the file's time unit to milliseconds.
  double time_scale = 1.0;
  std::optional<std::string> device_name;

  static std::vector<std::pair<std::string, Status>> default_failure_markers();
};

TuningCache import_external_cache(std::string_view text, const ImportOptions& options = {});
TuningCache import_external_cache_file(const std::filesystem::path& path,
                                       const ImportOptions& options = {});

// Hardware description kept next to caches.
struct DeviceMeta {
  std::string device_name;
  std::string vendor;
  std::map<std::string, std::string> properties;

  bool operator==(const DeviceMeta&) const = default;
};

std::string serialize_device_meta(const DeviceMeta& meta);
DeviceMeta parse_device_meta(std::string_view text);
DeviceMeta read_device_meta(const std::filesystem::path& path);
void write_device_meta(const DeviceMeta& meta, const std::filesystem::path& path);

// Shared by the cache writers.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace tunescape
