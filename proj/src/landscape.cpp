#include "tunescape/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tunescape/errors.hpp"

namespace tunescape {

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty set");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

PerfStats perf_stats(const TuningCache& cache) {
  PerfStats stats;
  std::vector<double> perf;
  double min_time = 0;
  for (const auto& [key, obs] : cache.records) {
    if (!obs.ok()) {
      ++stats.n_failed;
      continue;
    }
    perf.push_back(obs.performance());
    if (stats.n_ok == 0 || *obs.time_ms < min_time) min_time = *obs.time_ms;
    ++stats.n_ok;
  }
  if (perf.empty())
    throw NoFeasibleData(cache.records.empty() ? "cache has no records"
                                               : "every record in the cache failed");
  stats.max_perf = *std::max_element(perf.begin(), perf.end());
  stats.median_perf = median(std::move(perf));
  stats.min_time_ms = min_time;
  stats.impact = stats.max_perf / stats.median_perf;
  return stats;
}

std::vector<RankedConfig> top_k(const TuningCache& cache, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  std::vector<RankedConfig> all;
  for (const auto& [key, obs] : cache.records)
    if (obs.ok()) all.push_back({key, obs.performance()});
  // Records iterate in canonical order, so a stable sort keeps ties canonical.
  std::stable_sort(all.begin(), all.end(), [](const RankedConfig& a, const RankedConfig& b) {
    return a.metric_value > b.metric_value;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

DistributionDataset export_distribution(const TuningCache& cache) {
  DistributionDataset data;
  double best = 0;
  for (const auto& [key, obs] : cache.records) {
    if (!obs.ok()) continue;
    const double perf = obs.performance();
    best = data.rows.empty() ? perf : std::max(best, perf);
    data.rows.push_back({key, perf, 0.0});
  }
  if (data.rows.empty()) throw NoFeasibleData("no ok configuration to export");
  std::vector<double> fractions;
  fractions.reserve(data.rows.size());
  for (auto& row : data.rows) {
    row.fraction_of_optimum = row.metric_value / best;
    fractions.push_back(row.fraction_of_optimum);
  }
  std::sort(fractions.begin(), fractions.end());
  for (std::size_t i = 0; i < DistributionDataset::kQuantiles.size(); ++i)
    data.quantiles[i] = quantile(fractions, DistributionDataset::kQuantiles[i]);
  return data;
}

}  // namespace tunescape
