#include <algorithm>
#include <numeric>
#include <set>

#include "tunescape/errors.hpp"
#include "tunescape/landscape.hpp"

namespace tunescape {

namespace {

double best_performance(const TuningCache& cache) {
  double best = 0;
  bool any = false;
  for (const auto& [key, obs] : cache.records) {
    if (!obs.ok()) continue;
    const double perf = obs.performance();
    best = any ? std::max(best, perf) : perf;
    any = true;
  }
  if (!any) throw NoFeasibleData("device '" + cache.device_name + "' has no ok record");
  return best;
}

double efficiency(const TuningCache& cache, const std::string& key, double best) {
  const Observation* obs = cache.find(key);
  if (!obs || !obs->ok()) return 0.0;
  return obs->performance() / best;
}

std::vector<const TuningCache*> select(const CacheSet& caches, std::span<const std::string> subset) {
  if (subset.empty()) throw std::invalid_argument("device subset is empty");
  std::set<std::string> unique(subset.begin(), subset.end());
  if (unique.size() != subset.size()) throw std::invalid_argument("device subset lists a device twice");
  std::vector<const TuningCache*> out;
  for (const auto& device : subset) {
    const auto it = caches.find(device);
    if (it == caches.end()) throw UnknownDevice(device);
    out.push_back(&it->second);
  }
  return out;
}

}  // namespace

double app_efficiency(const TuningCache& cache, const std::string& key) {
  return efficiency(cache, key, best_performance(cache));
}

double arithmetic_mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty set");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double harmonic_portability(std::span<const double> efficiencies) {
  if (efficiencies.empty()) throw std::invalid_argument("portability over an empty device set");
  double reciprocal_sum = 0.0;
  for (const double e : efficiencies) {
    if (e <= 0.0) return 0.0;
    reciprocal_sum += 1.0 / e;
  }
  const double hm = static_cast<double>(efficiencies.size()) / reciprocal_sum;
  const auto [lo, hi] = std::minmax_element(efficiencies.begin(), efficiencies.end());
  const double upper = std::min(*hi, arithmetic_mean(efficiencies));
  return std::clamp(hm, *lo, std::max(*lo, upper));
}

PortabilityReport perf_portability(const CacheSet& caches, std::span<const std::string> subset,
                                   const std::string& key) {
  const auto selected = select(caches, subset);
  PortabilityReport report;
  report.devices.assign(subset.begin(), subset.end());
  report.config = key;
  for (const TuningCache* cache : selected)
    report.efficiencies.push_back(efficiency(*cache, key, best_performance(*cache)));
  report.pp = harmonic_portability(report.efficiencies);
  return report;
}

std::optional<PortabilityReport> best_portable_config(const CacheSet& caches,
                                                      std::span<const std::string> subset) {
  const auto selected = select(caches, subset);
  std::vector<double> best;
  for (const TuningCache* cache : selected) best.push_back(best_performance(*cache));

  // Candidates: keys recorded on every device, in canonical order.
  std::vector<const std::string*> candidates;
  for (const auto& [key, obs] : selected.front()->records) {
    const bool everywhere = std::all_of(selected.begin() + 1, selected.end(),
                                        [&](const TuningCache* c) { return c->find(key) != nullptr; });
    if (everywhere) candidates.push_back(&key);
  }

  const auto n = static_cast<std::int64_t>(candidates.size());
  std::vector<double> scores(candidates.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<double> e(selected.size());
    for (std::size_t d = 0; d < selected.size(); ++d)
      e[d] = efficiency(*selected[d], *candidates[static_cast<std::size_t>(i)], best[d]);
    scores[static_cast<std::size_t>(i)] = harmonic_portability(e);
  }

  std::optional<std::size_t> winner;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] > 0 && (!winner || scores[i] > scores[*winner])) winner = i;
  if (!winner) return std::nullopt;
  return perf_portability(caches, subset, *candidates[*winner]);
}

}  // namespace tunescape
