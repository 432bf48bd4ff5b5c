#include "tunescape/observation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "tunescape/errors.hpp"

namespace tunescape {

const char* to_string(Status status) {
  switch (status) {
    case Status::ok: return "ok";
    case Status::compile_failed: return "compile_failed";
    case Status::runtime_failed: return "runtime_failed";
    case Status::invalid: return "invalid";
    case Status::timeout: return "timeout";
  }
  return "?";
}

Status parse_status(std::string_view text) {
  for (const Status s : {Status::ok, Status::compile_failed, Status::runtime_failed,
                         Status::invalid, Status::timeout})
    if (text == to_string(s)) return s;
  throw std::invalid_argument(fmt::format("unknown status '{}'", text));
}

const char* to_string(Aggregate aggregate) {
  switch (aggregate) {
    case Aggregate::mean: return "mean";
    case Aggregate::median: return "median";
    case Aggregate::min: return "min";
  }
  return "?";
}

Aggregate parse_aggregate(std::string_view text) {
  if (text == "mean") return Aggregate::mean;
  if (text == "median") return Aggregate::median;
  if (text == "min") return Aggregate::min;
  throw std::invalid_argument(fmt::format("unknown aggregate '{}'", text));
}

double aggregate(std::span<const double> times, Aggregate how) {
  if (times.empty()) throw std::invalid_argument("cannot aggregate an empty time list");
  switch (how) {
    case Aggregate::mean:
      return std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
    case Aggregate::min: return *std::min_element(times.begin(), times.end());
    case Aggregate::median: {
      std::vector<double> sorted(times.begin(), times.end());
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      return n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    }
  }
  return 0.0;
}

void MeasurementProtocol::validate() const {
  if (benchmark_runs < 1) throw std::invalid_argument("benchmark_runs must be at least 1");
  if (warmup_runs < 0) throw std::invalid_argument("warmup_runs must not be negative");
  if (timeout.count() <= 0) throw std::invalid_argument("timeout must be positive");
}

Observation Observation::success(std::string config, std::vector<double> times, double time,
                                 std::optional<double> metric) {
  Observation o;
  o.config = std::move(config);
  o.status = Status::ok;
  o.times_ms = std::move(times);
  o.time_ms = time;
  o.metric_value = metric;
  return o;
}

Observation Observation::failure(std::string config, Status status, std::string diagnostic) {
  if (status == Status::ok) throw std::invalid_argument("failure() needs a non-ok status");
  Observation o;
  o.config = std::move(config);
  o.status = status;
  o.diagnostic = std::move(diagnostic);
  return o;
}

double Observation::performance() const {
  if (!ok() || !time_ms) throw DomainError(fmt::format("configuration '{}' has no performance", config));
  return metric_value ? *metric_value : 1.0 / *time_ms;
}

}  // namespace tunescape
