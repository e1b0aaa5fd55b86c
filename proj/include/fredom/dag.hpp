#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fredom/types.hpp"

namespace fredom {

/// Binary adjacency with adj(i, j) = 1 meaning j -> i.
struct SummaryDag {
  IMat adj;
  std::vector<std::string> labels;
  std::optional<CMat> weights;

  static SummaryDag empty(std::size_t p, std::vector<std::string> labels = {});
  /// Edges j -> i for every nonzero off-diagonal entry (i, j) of w.
  static SummaryDag from_support(const CMat& w, std::vector<std::string> labels = {});

  std::size_t dim() const { return static_cast<std::size_t>(adj.rows()); }
  std::size_t edge_count() const;
  bool has_edge(int from, int to) const { return adj(to, from) != 0; }
  /// (from, to) pairs, ordered by target then source.
  std::vector<std::pair<int, int>> edges() const;
  /// Parents of node i in ascending order.
  std::vector<int> parents(int i) const;
  bool is_acyclic() const;
  /// Throws InvalidArgument on a shape problem, a self loop or a directed cycle.
  void validate() const;
};

/// Kahn's algorithm on adj (adj(i, j) = 1 for j -> i). Empty when cyclic;
/// otherwise smallest-index-first among available sources.
std::optional<Permutation> topological_sort(const IMat& adj);

/// Adds candidate edges (from, to) in order of decreasing magnitude to an
/// initially acyclic base graph, skipping any edge that would close a cycle.
IMat add_edges_acyclic(IMat base, std::vector<std::pair<std::pair<int, int>, double>> candidates);

}  // namespace fredom
