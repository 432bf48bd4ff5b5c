#include <algorithm>
#include <cmath>
#include <vector>
#include <stdexcept>

#include "tunescape/errors.hpp"
#include "tunescape/graph.hpp"

namespace tunescape {

namespace {

// Reductions sum fixed-size blocks in parallel, then the block totals serially, so the rounding
// pattern is independent of how many threads run.
constexpr std::int64_t kBlock = 4096;

template <typename Term>
double blocked_sum(std::int64_t n, Term&& term) {
  const std::int64_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::int64_t end = std::min(n, (b + 1) * kBlock);
    double s = 0.0;
    for (std::int64_t i = b * kBlock; i < end; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (const double s : partial) total += s;
  return total;
}

}  // namespace

std::vector<double> pagerank(const Digraph& graph, const PageRankOptions& options) {
  const auto n = static_cast<std::int64_t>(graph.size());
  if (n == 0) throw std::invalid_argument("pagerank of an empty graph");
  if (!(options.damping >= 0 && options.damping < 1))
    throw std::invalid_argument("damping must lie in [0, 1)");

  const double inv_n = 1.0 / static_cast<double>(n);
  const double d = options.damping;
  std::vector<double> rank(static_cast<std::size_t>(n), inv_n);
  std::vector<double> next(static_cast<std::size_t>(n));
  // Outgoing share per node: rank[u] / outdeg(u), or 0 for sinks.
  std::vector<double> share(static_cast<std::size_t>(n));
  std::vector<double> inv_degree(static_cast<std::size_t>(n));
  for (std::int64_t u = 0; u < n; ++u) {
    const std::size_t deg = graph.out_degree(static_cast<Digraph::Node>(u));
    inv_degree[static_cast<std::size_t>(u)] = deg ? 1.0 / static_cast<double>(deg) : 0.0;
  }

  double residual = 0.0;
  for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
#pragma omp parallel for schedule(static)
    for (std::int64_t u = 0; u < n; ++u)
      share[static_cast<std::size_t>(u)] = rank[static_cast<std::size_t>(u)] * inv_degree[static_cast<std::size_t>(u)];

    const double dangling = blocked_sum(n, [&](std::int64_t u) {
      return inv_degree[static_cast<std::size_t>(u)] == 0.0 ? rank[static_cast<std::size_t>(u)] : 0.0;
    });
    const double base = (1.0 - d) * inv_n + d * dangling * inv_n;

#pragma omp parallel for schedule(dynamic, 1024)
    for (std::int64_t v = 0; v < n; ++v) {
      double incoming = 0.0;
      for (const Digraph::Node u : graph.predecessors(static_cast<Digraph::Node>(v)))
        incoming += share[u];
      next[static_cast<std::size_t>(v)] = base + d * incoming;
    }

    residual = blocked_sum(n, [&](std::int64_t v) {
      return std::abs(next[static_cast<std::size_t>(v)] - rank[static_cast<std::size_t>(v)]);
    });
    rank.swap(next);
    if (residual < options.tolerance) return rank;
  }
  throw NotConverged(options.max_iterations, residual);
}

}  // namespace tunescape
