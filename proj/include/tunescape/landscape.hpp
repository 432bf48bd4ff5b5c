#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tunescape/cache.hpp"
#include "tunescape/graph.hpp"
#include "tunescape/space.hpp"

namespace tunescape {

// ---------------------------------------------------------------------------------------------
// Tuning impact

struct PerfStats {
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  double median_perf = 0;
  double max_perf = 0;
  double min_time_ms = 0;
  double impact = 0;  // max_perf / median_perf
};

// Throws NoFeasibleData when no record is ok.
PerfStats perf_stats(const TuningCache& cache);

double median(std::vector<double> values);
// Linear interpolation between closest ranks; q in [0, 1]. `sorted` must be ascending.
double quantile(std::span<const double> sorted, double q);

// ---------------------------------------------------------------------------------------------
// Fitness flow graph and centrality

// Nodes are the ok configurations in canonical order; u -> v iff v neighbours u and
// time(v) < time(u). Failed configurations are omitted.
class FitnessFlowGraph {
 public:
  FitnessFlowGraph(std::vector<Configuration> configs, std::vector<std::string> keys,
                   std::vector<double> times, Digraph graph, NeighborScheme scheme);

  std::size_t size() const noexcept { return configs_.size(); }
  const Digraph& graph() const noexcept { return graph_; }
  const std::vector<Configuration>& configs() const noexcept { return configs_; }
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  const std::vector<double>& times() const noexcept { return times_; }
  NeighborScheme scheme() const noexcept { return scheme_; }
  double f_opt() const noexcept { return f_opt_; }

 private:
  std::vector<Configuration> configs_;
  std::vector<std::string> keys_;
  std::vector<double> times_;
  Digraph graph_;
  NeighborScheme scheme_;
  double f_opt_;
};

// Throws SpaceMismatch, IncompleteCache (valid configurations without any record) or
// NoFeasibleData. Edge construction is parallel over nodes.
FitnessFlowGraph build_ffg(const TuningCache& cache, const SearchSpaceSpec& space,
                           NeighborScheme scheme);

// Node indices with no outgoing edge, ascending.
std::vector<std::size_t> find_local_minima(const FitnessFlowGraph& ffg);

std::vector<double> pagerank(const FitnessFlowGraph& ffg, const PageRankOptions& options = {});

// Share of the minima's centrality held by minima with time <= (1 + p) * f_opt. The bound is
// inclusive so that p = 0 admits the global optimum.
double proportion_of_centrality(const FitnessFlowGraph& ffg, std::span<const double> scores,
                                double p);

struct CentralityCurve {
  std::vector<double> p_grid;
  std::vector<double> c_p_values;
  double damping = 0;
  std::size_t minima_count = 0;
  NeighborScheme scheme = NeighborScheme::hamming1;
};

// {0, step, 2*step, ..., p_max}, each point computed as i * step.
std::vector<double> default_p_grid(double p_max = 0.15, double step = 0.005);

CentralityCurve centrality_curve(const FitnessFlowGraph& ffg, const PageRankOptions& options = {},
                                 std::vector<double> p_grid = default_p_grid());

// ---------------------------------------------------------------------------------------------
// Performance portability

// performance(key) / best performance on the device; 0 for absent or failed configurations.
// Throws NoFeasibleData when the cache has no ok record.
double app_efficiency(const TuningCache& cache, const std::string& key);

// Harmonic mean of the efficiencies, 0 if any is 0. The result is clamped into
// [min e, min(max e, arithmetic mean)] so rounding cannot break the mean inequalities.
double harmonic_portability(std::span<const double> efficiencies);
double arithmetic_mean(std::span<const double> values);

struct PortabilityReport {
  std::vector<std::string> devices;
  std::string config;
  std::vector<double> efficiencies;
  double pp = 0;
};

using CacheSet = std::map<std::string, TuningCache>;  // device name -> cache

PortabilityReport perf_portability(const CacheSet& caches, std::span<const std::string> subset,
                                   const std::string& key);

// Highest-PP configuration among those recorded (any status) on every device of the subset;
// ties go to the canonically first key. nullopt when no configuration has PP > 0.
std::optional<PortabilityReport> best_portable_config(const CacheSet& caches,
                                                      std::span<const std::string> subset);

// ---------------------------------------------------------------------------------------------
// Tables and exports

struct RankedConfig {
  std::string config;
  double metric_value;
};

// Best k ok configurations by performance, ties in canonical order.
std::vector<RankedConfig> top_k(const TuningCache& cache, std::size_t k);

struct DistributionRow {
  std::string config;
  double metric_value;
  double fraction_of_optimum;
};

struct DistributionDataset {
  static constexpr std::array<double, 7> kQuantiles{0.01, 0.05, 0.25, 0.50, 0.75, 0.95, 0.99};

  std::vector<DistributionRow> rows;  // canonical order
  std::array<double, 7> quantiles{};  // of fraction_of_optimum
};

DistributionDataset export_distribution(const TuningCache& cache);

std::string distribution_csv(const DistributionDataset& data);
std::string quantiles_csv(const DistributionDataset& data);
std::string centrality_csv(const CentralityCurve& curve);
std::string portability_json(const PortabilityReport& report);

// Graphviz digraph; each node carries its key as label and a `bucket` attribute from 0 (fastest
// tenth) to 9.
std::string export_dot(const FitnessFlowGraph& ffg);

}  // namespace tunescape
