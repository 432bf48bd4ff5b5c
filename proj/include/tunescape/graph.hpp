#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tunescape {

// Immutable directed graph in compressed sparse row form, with the transposed adjacency kept
// alongside for pull-style iteration.
class Digraph {
 public:
  using Node = std::uint32_t;

  Digraph() = default;
  // Edges are deduplicated; self-loops are rejected with std::invalid_argument.
  static Digraph from_edges(std::size_t nodes, std::vector<std::pair<Node, Node>> edges);
  // `successors[u]` lists the targets of u's out-edges.
  static Digraph from_adjacency(const std::vector<std::vector<Node>>& successors);

  std::size_t size() const noexcept { return out_offsets_.empty() ? 0 : out_offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return out_targets_.size(); }

  std::span<const Node> successors(Node u) const {
    return {out_targets_.data() + out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]};
  }
  std::span<const Node> predecessors(Node v) const {
    return {in_sources_.data() + in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]};
  }
  std::size_t out_degree(Node u) const { return out_offsets_[u + 1] - out_offsets_[u]; }

  // Nodes with out-degree zero, ascending.
  std::vector<Node> sinks() const;
  // Kahn's algorithm; empty optional-like result (false) when a cycle exists.
  bool is_acyclic() const;

 private:
  std::vector<std::size_t> out_offsets_;
  std::vector<Node> out_targets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<Node> in_sources_;
};

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-8;  // on the L1 change between iterates
  std::size_t max_iterations = 10'000;
};

// PageRank by power iteration: follow an out-edge with probability `damping`, teleport uniformly
// otherwise; sinks redistribute their mass uniformly over all nodes. Parallel over nodes with
// OpenMP; reductions use fixed-size blocks so results do not depend on the thread count.
// Throws NotConverged carrying the last residual.
std::vector<double> pagerank(const Digraph& graph, const PageRankOptions& options = {});

}  // namespace tunescape
