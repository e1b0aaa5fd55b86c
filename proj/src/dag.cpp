#include "fredom/dag.hpp"

#include <algorithm>
#include <queue>

namespace fredom {
namespace {

// True when `to` can reach `from` along existing edges, i.e. from -> to closes a cycle.
bool reaches(const IMat& adj, int start, int target) {
  const auto p = static_cast<int>(adj.rows());
  std::vector<bool> seen(p, false);
  std::vector<int> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (u == target) return true;
    for (int v = 0; v < p; ++v) {
      if (adj(v, u) != 0 && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return false;
}

}  // namespace

SummaryDag SummaryDag::empty(std::size_t p, std::vector<std::string> labels) {
  SummaryDag g;
  g.adj = IMat::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  g.labels = labels.empty() ? default_labels(p) : std::move(labels);
  return g;
}

SummaryDag SummaryDag::from_support(const CMat& w, std::vector<std::string> labels) {
  SummaryDag g = empty(static_cast<std::size_t>(w.rows()), std::move(labels));
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      if (i != j && w(i, j) != cplx(0.0, 0.0)) g.adj(i, j) = 1;
  g.weights = w;
  for (Eigen::Index i = 0; i < w.rows(); ++i) (*g.weights)(i, i) = 0.0;
  return g;
}

std::size_t SummaryDag::edge_count() const {
  return static_cast<std::size_t>((adj.array() != 0).count());
}

std::vector<std::pair<int, int>> SummaryDag::edges() const {
  std::vector<std::pair<int, int>> out;
  for (Eigen::Index i = 0; i < adj.rows(); ++i)
    for (Eigen::Index j = 0; j < adj.cols(); ++j)
      if (adj(i, j) != 0) out.emplace_back(static_cast<int>(j), static_cast<int>(i));
  return out;
}

std::vector<int> SummaryDag::parents(int i) const {
  std::vector<int> out;
  for (Eigen::Index j = 0; j < adj.cols(); ++j)
    if (adj(i, j) != 0) out.push_back(static_cast<int>(j));
  return out;
}

bool SummaryDag::is_acyclic() const { return topological_sort(adj).has_value(); }

void SummaryDag::validate() const {
  if (adj.rows() != adj.cols()) throw InvalidArgument("adjacency matrix must be square");
  if (!labels.empty() && labels.size() != dim()) throw InvalidArgument("label count mismatch");
  for (Eigen::Index i = 0; i < adj.rows(); ++i)
    if (adj(i, i) != 0) throw InvalidArgument("graph has a self loop at node " + std::to_string(i + 1));
  if (!is_acyclic()) throw InvalidArgument("graph contains a directed cycle");
}

std::optional<Permutation> topological_sort(const IMat& adj) {
  const auto p = static_cast<int>(adj.rows());
  std::vector<int> indeg(p, 0);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (adj(i, j) != 0) ++indeg[i];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < p; ++i)
    if (indeg[i] == 0) ready.push(i);
  Permutation order;
  order.reserve(p);
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int v = 0; v < p; ++v) {
      if (adj(v, u) != 0 && --indeg[v] == 0) ready.push(v);
    }
  }
  if (static_cast<int>(order.size()) != p) return std::nullopt;
  return order;
}

IMat add_edges_acyclic(IMat base, std::vector<std::pair<std::pair<int, int>, double>> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [edge, magnitude] : candidates) {
    const auto [from, to] = edge;
    if (from == to || base(to, from) != 0) continue;
    if (reaches(base, to, from)) continue;
    base(to, from) = 1;
  }
  return base;
}

}  // namespace fredom
