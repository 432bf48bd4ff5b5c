#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tunescape/cache.hpp"
#include "tunescape/measure.hpp"
#include "tunescape/space.hpp"

namespace tunescape {

struct Budget {
  // 0 means unlimited, which only brute force accepts.
  std::uint64_t max_evaluations = 0;
};

struct TraceEntry {
  Configuration config;
  Observation observation;
};

struct StrategyResult {
  std::optional<Configuration> best;  // empty when no configuration measured ok
  std::optional<Observation> best_observation;
  std::vector<TraceEntry> trace;  // one entry per distinct measurement, in measurement order
  std::uint64_t evaluations_used = 0;
  bool budget_clamped = false;  // the budget exceeded the space size

  // Local search only. Each path lists trace indices of the points a restart moved through.
  std::vector<std::vector<std::size_t>> paths;
  // Local search only. Points confirmed as local minima (every neighbour measured, none better).
  std::vector<Configuration> local_minima;
};

// Measures every valid configuration once, in canonical order.
std::pair<StrategyResult, TuningCache> brute_force(const SearchSpaceSpec& space, Backend& backend,
                                                   const MeasurementProtocol& protocol,
                                                   const std::string& device_name = "unknown");

// Samples distinct valid configurations uniformly without replacement.
StrategyResult random_search(const SearchSpaceSpec& space, Backend& backend,
                             const MeasurementProtocol& protocol, Budget budget,
                             std::uint64_t seed);

struct LocalSearchOptions {
  NeighborScheme scheme = NeighborScheme::hamming1;
  bool first_improvement = false;
};

// Steepest-descent hill climbing over the neighbourhood graph with random restarts. Revisited
// configurations are served from the run's memo and cost no budget.
StrategyResult greedy_local_search(const SearchSpaceSpec& space, Backend& backend,
                                   const MeasurementProtocol& protocol, Budget budget,
                                   std::uint64_t seed, LocalSearchOptions options = {});

// Collects the trace of a strategy run into a cache tied to `space`.
TuningCache trace_to_cache(const SearchSpaceSpec& space, const StrategyResult& result,
                           const std::string& device_name);

// Seeded generator whose draws are identical on every standard library: std::mt19937_64 has a
// fully specified output sequence, and bounded draws use rejection instead of
// std::uniform_int_distribution.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

}  // namespace tunescape
