#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tunescape {

enum class Status { ok, compile_failed, runtime_failed, invalid, timeout };

const char* to_string(Status status);
Status parse_status(std::string_view text);

enum class Aggregate { mean, median, min };

const char* to_string(Aggregate aggregate);
Aggregate parse_aggregate(std::string_view text);

// Aggregates per-run times. `times` must be non-empty.
double aggregate(std::span<const double> times, Aggregate how);

struct MeasurementProtocol {
  int warmup_runs = 1;
  int benchmark_runs = 7;
  Aggregate aggregate = Aggregate::mean;
  std::chrono::milliseconds timeout{60'000};

  // Throws std::invalid_argument when benchmark_runs < 1, warmup_runs < 0 or timeout <= 0.
  void validate() const;
};

// One measured configuration. All times are milliseconds; fitness is time (lower is better).
struct Observation {
  std::string config;  // canonical key
  Status status = Status::ok;
  std::vector<double> times_ms;
  std::optional<double> time_ms;
  std::optional<double> metric_value;
  std::string diagnostic;

  static Observation success(std::string config, std::vector<double> times, double time,
                             std::optional<double> metric = std::nullopt);
  static Observation failure(std::string config, Status status, std::string diagnostic = {});

  bool ok() const noexcept { return status == Status::ok; }
  // Higher-is-better performance: the metric when recorded, otherwise 1/time_ms.
  double performance() const;

  bool operator==(const Observation&) const = default;
};

}  // namespace tunescape
