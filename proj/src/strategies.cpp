#include "tunescape/strategies.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace tunescape {

std::uint64_t SeededRng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("SeededRng::below needs a positive bound");
  // Largest multiple of bound that fits, so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t draw = engine_();
    if (draw < limit) return draw % bound;
  }
}

namespace {

// Memoizing measurement front end shared by the strategies.
class Evaluator {
 public:
  Evaluator(const SearchSpaceSpec& space, Backend& backend, const MeasurementProtocol& protocol,
            std::uint64_t max_evaluations)
      : space_(space), backend_(backend), protocol_(protocol), max_(max_evaluations) {}

  // Trace index of the configuration's observation, or nullopt when measuring it would exceed
  // the budget.
  std::optional<std::size_t> evaluate(const Configuration& config) {
    const std::uint64_t rank = space_.rank(config);
    if (const auto it = memo_.find(rank); it != memo_.end()) return it->second;
    if (max_ != 0 && result_.evaluations_used >= max_) return std::nullopt;

    Observation obs = backend_.measure(config, protocol_);
    const std::size_t index = result_.trace.size();
    result_.trace.push_back({config, std::move(obs)});
    ++result_.evaluations_used;
    memo_.emplace(rank, index);

    const Observation& added = result_.trace.back().observation;
    if (added.ok()) {
      const bool better =
          !result_.best_observation || *added.time_ms < *result_.best_observation->time_ms ||
          (*added.time_ms == *result_.best_observation->time_ms &&
           space_.rank(config) < space_.rank(*result_.best));
      if (better) {
        result_.best = config;
        result_.best_observation = added;
      }
    }
    return index;
  }

  bool seen(std::uint64_t rank) const { return memo_.contains(rank); }
  bool exhausted() const { return max_ != 0 && result_.evaluations_used >= max_; }
  const TraceEntry& entry(std::size_t index) const { return result_.trace[index]; }
  StrategyResult& result() { return result_; }

 private:
  const SearchSpaceSpec& space_;
  Backend& backend_;
  const MeasurementProtocol& protocol_;
  std::uint64_t max_;
  std::unordered_map<std::uint64_t, std::size_t> memo_;
  StrategyResult result_;
};

void require_budget(Budget budget) {
  if (budget.max_evaluations < 1) throw std::invalid_argument("budget must allow at least one evaluation");
}

}  // namespace

std::pair<StrategyResult, TuningCache> brute_force(const SearchSpaceSpec& space, Backend& backend,
                                                   const MeasurementProtocol& protocol,
                                                   const std::string& device_name) {
  protocol.validate();
  Evaluator eval(space, backend, protocol, 0);
  space.for_each_config([&](const Configuration& c) { eval.evaluate(c); });
  StrategyResult result = std::move(eval.result());
  TuningCache cache = trace_to_cache(space, result, device_name);
  return {std::move(result), std::move(cache)};
}

StrategyResult random_search(const SearchSpaceSpec& space, Backend& backend,
                             const MeasurementProtocol& protocol, Budget budget,
                             std::uint64_t seed) {
  require_budget(budget);
  protocol.validate();
  std::vector<std::uint64_t> ranks = space.enumerate_ranks();
  std::uint64_t draws = budget.max_evaluations;
  bool clamped = false;
  if (draws > ranks.size()) {
    draws = ranks.size();
    clamped = true;
  }

  SeededRng rng(seed);
  Evaluator eval(space, backend, protocol, draws);
  for (std::uint64_t i = 0; i < draws; ++i) {
    const std::uint64_t j = i + rng.below(ranks.size() - i);
    std::swap(ranks[i], ranks[j]);
    eval.evaluate(space.unrank(ranks[i]));
  }
  StrategyResult result = std::move(eval.result());
  result.budget_clamped = clamped;
  return result;
}

StrategyResult greedy_local_search(const SearchSpaceSpec& space, Backend& backend,
                                   const MeasurementProtocol& protocol, Budget budget,
                                   std::uint64_t seed, LocalSearchOptions options) {
  require_budget(budget);
  protocol.validate();
  std::vector<std::uint64_t> ranks = space.enumerate_ranks();
  bool clamped = false;
  if (budget.max_evaluations > ranks.size()) {
    budget.max_evaluations = std::max<std::uint64_t>(ranks.size(), 1);
    clamped = true;
  }

  SeededRng rng(seed);
  Evaluator eval(space, backend, protocol, budget.max_evaluations);
  std::size_t shuffled = 0;  // ranks[0, shuffled) have been drawn as start candidates

  auto next_start = [&]() -> std::optional<Configuration> {
    while (shuffled < ranks.size()) {
      const std::size_t j = shuffled + rng.below(ranks.size() - shuffled);
      std::swap(ranks[shuffled], ranks[j]);
      const std::uint64_t r = ranks[shuffled++];
      if (!eval.seen(r)) return space.unrank(r);
    }
    return std::nullopt;
  };

  bool out_of_budget = false;
  while (!out_of_budget && !eval.exhausted()) {
    const auto start = next_start();
    if (!start) break;
    const auto start_index = eval.evaluate(*start);
    if (!start_index) break;

    std::vector<std::size_t> path{*start_index};
    if (!eval.entry(*start_index).observation.ok()) {
      eval.result().paths.push_back(std::move(path));
      continue;
    }

    std::size_t current = *start_index;
    for (;;) {
      const Configuration here = eval.entry(current).config;
      const double here_time = *eval.entry(current).observation.time_ms;
      std::optional<std::size_t> move;
      bool complete = true;
      for (const Configuration& nb : space.neighbors(here, options.scheme)) {
        const auto idx = eval.evaluate(nb);
        if (!idx) {
          complete = false;
          break;
        }
        const Observation& obs = eval.entry(*idx).observation;
        if (!obs.ok() || !(*obs.time_ms < here_time)) continue;
        if (options.first_improvement) {
          move = idx;
          break;
        }
        if (!move) {
          move = idx;
          continue;
        }
        const TraceEntry& incumbent = eval.entry(*move);
        const double t = *obs.time_ms;
        const double best_t = *incumbent.observation.time_ms;
        if (t < best_t || (t == best_t && space.rank(nb) < space.rank(incumbent.config))) move = idx;
      }
      if (!complete && !(options.first_improvement && move)) {
        out_of_budget = true;
        break;
      }
      if (!move) {
        eval.result().local_minima.push_back(here);
        break;
      }
      current = *move;
      path.push_back(current);
    }
    eval.result().paths.push_back(std::move(path));
  }

  StrategyResult result = std::move(eval.result());
  result.budget_clamped = clamped;
  return result;
}

TuningCache trace_to_cache(const SearchSpaceSpec& space, const StrategyResult& result,
                           const std::string& device_name) {
  TuningCache cache = TuningCache::for_space(space, device_name);
  for (const auto& entry : result.trace) cache.insert(entry.observation);
  if (space.metric()) cache.metadata["metric"] = space.metric()->source();
  return cache;
}

}  // namespace tunescape
