#pragma once

// Straightforward single-threaded versions of the parallel kernels. They share no code with the
// optimized paths and exist for cross-checking and benchmarking.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tunescape/graph.hpp"
#include "tunescape/landscape.hpp"
#include "tunescape/space.hpp"

namespace tunescape::serial {

// Push-style power iteration with a plain running sum.
std::vector<double> pagerank(const Digraph& graph, const PageRankOptions& options = {});

// Builds the graph through SearchSpaceSpec::neighbors and a key lookup.
FitnessFlowGraph build_ffg(const TuningCache& cache, const SearchSpaceSpec& space,
                           NeighborScheme scheme);

std::optional<PortabilityReport> best_portable_config(const CacheSet& caches,
                                                      std::span<const std::string> subset);

// Visits the Cartesian product and tests every constraint on every point.
std::uint64_t count_valid(const SearchSpaceSpec& space);

}  // namespace tunescape::serial
