#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "tunescape/errors.hpp"
#include "tunescape/landscape.hpp"

namespace tunescape {

FitnessFlowGraph::FitnessFlowGraph(std::vector<Configuration> configs, std::vector<std::string> keys,
                                   std::vector<double> times, Digraph graph, NeighborScheme scheme)
    : configs_(std::move(configs)),
      keys_(std::move(keys)),
      times_(std::move(times)),
      graph_(std::move(graph)),
      scheme_(scheme),
      f_opt_(times_.empty() ? 0.0 : *std::min_element(times_.begin(), times_.end())) {}

FitnessFlowGraph build_ffg(const TuningCache& cache, const SearchSpaceSpec& space,
                           NeighborScheme scheme) {
  cache.check_space(space);

  std::vector<Configuration> configs;
  std::vector<std::string> keys;
  std::vector<double> times;
  std::size_t missing = 0;
  space.for_each_config([&](const Configuration& c) {
    std::string key = space.key(c);
    const Observation* obs = cache.find(key);
    if (!obs) {
      ++missing;
      return;
    }
    if (!obs->ok()) return;
    configs.push_back(c);
    keys.push_back(std::move(key));
    times.push_back(*obs->time_ms);
  });
  if (missing) throw IncompleteCache(missing);
  if (configs.empty()) throw NoFeasibleData("no ok configuration to build a fitness flow graph from");

  std::unordered_map<std::uint64_t, Digraph::Node> node_of;
  node_of.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i)
    node_of.emplace(space.rank(configs[i]), static_cast<Digraph::Node>(i));

  // Every valid configuration is enumerated above, so a Cartesian neighbour that is a node is
  // also valid; constraints need not be re-evaluated here.
  const auto& params = space.parameters();
  std::vector<std::uint64_t> stride(params.size(), 1);
  for (std::size_t i = params.size() - 1; i-- > 0;)
    stride[i] = stride[i + 1] * params[i + 1].values.size();

  const auto n = static_cast<std::int64_t>(configs.size());
  std::vector<std::vector<Digraph::Node>> successors(configs.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t u = 0; u < n; ++u) {
    const auto& idx = configs[static_cast<std::size_t>(u)].indices;
    const std::uint64_t own_rank = space.rank(configs[static_cast<std::size_t>(u)]);
    const double own_time = times[static_cast<std::size_t>(u)];
    auto& out = successors[static_cast<std::size_t>(u)];
    auto consider = [&](std::size_t param, std::uint32_t value) {
      const std::uint64_t r = own_rank - idx[param] * stride[param] + value * stride[param];
      const auto it = node_of.find(r);
      if (it != node_of.end() && times[it->second] < own_time) out.push_back(it->second);
    };
    for (std::size_t p = 0; p < params.size(); ++p) {
      const auto count = static_cast<std::uint32_t>(params[p].values.size());
      if (scheme == NeighborScheme::hamming1) {
        for (std::uint32_t j = 0; j < count; ++j)
          if (j != idx[p]) consider(p, j);
      } else {
        if (idx[p] > 0) consider(p, idx[p] - 1);
        if (idx[p] + 1 < count) consider(p, idx[p] + 1);
      }
    }
  }

  return FitnessFlowGraph(std::move(configs), std::move(keys), std::move(times),
                          Digraph::from_adjacency(successors), scheme);
}

std::vector<std::size_t> find_local_minima(const FitnessFlowGraph& ffg) {
  std::vector<std::size_t> out;
  for (const auto s : ffg.graph().sinks()) out.push_back(s);
  return out;
}

std::vector<double> pagerank(const FitnessFlowGraph& ffg, const PageRankOptions& options) {
  return pagerank(ffg.graph(), options);
}

double proportion_of_centrality(const FitnessFlowGraph& ffg, std::span<const double> scores,
                                double p) {
  if (scores.size() != ffg.size()) throw std::invalid_argument("score vector does not match graph");
  const double threshold = (1.0 + p) * ffg.f_opt();
  double within = 0.0;
  double total = 0.0;
  for (const auto m : ffg.graph().sinks()) {
    total += scores[m];
    if (ffg.times()[m] <= threshold) within += scores[m];
  }
  return within / total;
}

std::vector<double> default_p_grid(double p_max, double step) {
  if (!(step > 0) || p_max < 0) throw std::invalid_argument("p grid needs step > 0 and p_max >= 0");
  std::vector<double> grid;
  // Tolerate p_max not being an exact multiple of step in binary.
  const auto points = static_cast<std::size_t>(std::floor(p_max / step + 1e-9));
  for (std::size_t i = 0; i <= points; ++i) grid.push_back(static_cast<double>(i) * step);
  return grid;
}

CentralityCurve centrality_curve(const FitnessFlowGraph& ffg, const PageRankOptions& options,
                                 std::vector<double> p_grid) {
  const std::vector<double> scores = pagerank(ffg, options);
  CentralityCurve curve;
  curve.damping = options.damping;
  curve.minima_count = ffg.graph().sinks().size();
  curve.scheme = ffg.scheme();
  for (const double p : p_grid) curve.c_p_values.push_back(proportion_of_centrality(ffg, scores, p));
  curve.p_grid = std::move(p_grid);
  return curve;
}

}  // namespace tunescape
