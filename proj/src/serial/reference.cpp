#include "tunescape/serial.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "tunescape/errors.hpp"

namespace tunescape::serial {

std::vector<double> pagerank(const Digraph& graph, const PageRankOptions& options) {
  const std::size_t n = graph.size();
  if (n == 0) throw std::invalid_argument("pagerank of an empty graph");
  const double d = options.damping;
  std::vector<double> rank(n, 1.0 / static_cast<double>(n));
  double residual = 0.0;
  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
    std::vector<double> next(n, 0.0);
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      const auto out = graph.successors(static_cast<Digraph::Node>(u));
      if (out.empty()) {
        dangling += rank[u];
        continue;
      }
      const double share = rank[u] / static_cast<double>(out.size());
      for (const auto v : out) next[v] += share;
    }
    const double base = ((1.0 - d) + d * dangling) / static_cast<double>(n);
    residual = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      next[v] = base + d * next[v];
      residual += std::abs(next[v] - rank[v]);
    }
    rank.swap(next);
    if (residual < options.tolerance) return rank;
  }
  throw NotConverged(options.max_iterations, residual);
}

FitnessFlowGraph build_ffg(const TuningCache& cache, const SearchSpaceSpec& space,
                           NeighborScheme scheme) {
  cache.check_space(space);
  std::vector<Configuration> configs;
  std::vector<std::string> keys;
  std::vector<double> times;
  std::map<std::string, Digraph::Node> node_of;
  std::size_t missing = 0;
  for (const auto& c : space.enumerate()) {
    const std::string key = space.key(c);
    const Observation* obs = cache.find(key);
    if (!obs) {
      ++missing;
      continue;
    }
    if (!obs->ok()) continue;
    node_of[key] = static_cast<Digraph::Node>(configs.size());
    configs.push_back(c);
    keys.push_back(key);
    times.push_back(*obs->time_ms);
  }
  if (missing) throw IncompleteCache(missing);
  if (configs.empty()) throw NoFeasibleData("no ok configuration to build a fitness flow graph from");

  std::vector<std::pair<Digraph::Node, Digraph::Node>> edges;
  for (std::size_t u = 0; u < configs.size(); ++u) {
    for (const auto& nb : space.neighbors(configs[u], scheme)) {
      const auto it = node_of.find(space.key(nb));
      if (it != node_of.end() && times[it->second] < times[u])
        edges.emplace_back(static_cast<Digraph::Node>(u), it->second);
    }
  }
  const std::size_t n = configs.size();
  return FitnessFlowGraph(std::move(configs), std::move(keys), std::move(times),
                          Digraph::from_edges(n, std::move(edges)), scheme);
}

std::optional<PortabilityReport> best_portable_config(const CacheSet& caches,
                                                      std::span<const std::string> subset) {
  if (subset.empty()) throw std::invalid_argument("device subset is empty");
  std::vector<const TuningCache*> selected;
  std::vector<double> best_perf;
  for (const auto& device : subset) {
    const auto it = caches.find(device);
    if (it == caches.end()) throw UnknownDevice(device);
    selected.push_back(&it->second);
    std::optional<double> top;
    for (const auto& [key, obs] : it->second.records)
      if (obs.ok()) top = std::max(top.value_or(obs.performance()), obs.performance());
    if (!top) throw NoFeasibleData("device '" + device + "' has no ok record");
    best_perf.push_back(*top);
  }

  std::optional<PortabilityReport> best;
  for (const auto& [key, obs] : selected.front()->records) {
    PortabilityReport report;
    report.devices.assign(subset.begin(), subset.end());
    report.config = key;
    bool everywhere = true;
    for (std::size_t d = 0; d < selected.size() && everywhere; ++d) {
      const Observation* o = selected[d]->find(key);
      everywhere = o != nullptr;
      if (o) report.efficiencies.push_back(o->ok() ? o->performance() / best_perf[d] : 0.0);
    }
    if (!everywhere) continue;
    report.pp = harmonic_portability(report.efficiencies);
    if (report.pp > 0 && (!best || report.pp > best->pp)) best = std::move(report);
  }
  return best;
}

std::uint64_t count_valid(const SearchSpaceSpec& space) {
  const std::uint64_t total = space.cartesian_size();
  std::uint64_t count = 0;
  for (std::uint64_t r = 0; r < total; ++r)
    if (space.is_valid(space.unrank(r))) ++count;
  return count;
}

}  // namespace tunescape::serial
