#include <algorithm>
#include <stdexcept>

#include "tunescape/graph.hpp"

namespace tunescape {

Digraph Digraph::from_edges(std::size_t nodes, std::vector<std::pair<Node, Node>> edges) {
  for (const auto& [u, v] : edges) {
    if (u >= nodes || v >= nodes) throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loops are not allowed");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Digraph g;
  g.out_offsets_.assign(nodes + 1, 0);
  g.in_offsets_.assign(nodes + 1, 0);
  for (const auto& [u, v] : edges) {
    ++g.out_offsets_[u + 1];
    ++g.in_offsets_[v + 1];
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    g.out_offsets_[i + 1] += g.out_offsets_[i];
    g.in_offsets_[i + 1] += g.in_offsets_[i];
  }
  g.out_targets_.resize(edges.size());
  g.in_sources_.resize(edges.size());
  std::vector<std::size_t> out_fill(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  // Sorted edge order keeps both adjacency lists ascending.
  for (const auto& [u, v] : edges) {
    g.out_targets_[out_fill[u]++] = v;
    g.in_sources_[in_fill[v]++] = u;
  }
  return g;
}

Digraph Digraph::from_adjacency(const std::vector<std::vector<Node>>& successors) {
  std::vector<std::pair<Node, Node>> edges;
  for (std::size_t u = 0; u < successors.size(); ++u)
    for (const Node v : successors[u]) edges.emplace_back(static_cast<Node>(u), v);
  return from_edges(successors.size(), std::move(edges));
}

std::vector<Digraph::Node> Digraph::sinks() const {
  std::vector<Node> out;
  for (std::size_t u = 0; u < size(); ++u)
    if (out_degree(static_cast<Node>(u)) == 0) out.push_back(static_cast<Node>(u));
  return out;
}

bool Digraph::is_acyclic() const {
  std::vector<std::size_t> indegree(size());
  for (std::size_t v = 0; v < size(); ++v) indegree[v] = in_offsets_[v + 1] - in_offsets_[v];
  std::vector<Node> ready;
  for (std::size_t v = 0; v < size(); ++v)
    if (indegree[v] == 0) ready.push_back(static_cast<Node>(v));
  std::size_t visited = 0;
  while (!ready.empty()) {
    const Node u = ready.back();
    ready.pop_back();
    ++visited;
    for (const Node v : successors(u))
      if (--indegree[v] == 0) ready.push_back(v);
  }
  return visited == size();
}

}  // namespace tunescape
