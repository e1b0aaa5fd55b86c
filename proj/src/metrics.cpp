#include "fredom/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

namespace fredom {
namespace {

void check_pair(const SummaryDag& a, const SummaryDag& b) {
  if (a.adj.rows() != b.adj.rows() || a.adj.rows() != a.adj.cols() || b.adj.rows() != b.adj.cols())
    throw InvalidArgument("graphs must have the same number of nodes");
}

std::vector<bool> ancestors_of(const IMat& adj, const std::vector<int>& z) {
  const int p = static_cast<int>(adj.rows());
  std::vector<bool> mark(p, false);
  std::deque<int> queue(z.begin(), z.end());
  for (int v : z) mark[v] = true;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u = 0; u < p; ++u)
      if (adj(v, u) != 0 && !mark[u]) {
        mark[u] = true;
        queue.push_back(u);
      }
  }
  return mark;
}

}  // namespace

int shd(const SummaryDag& est, const SummaryDag& truth) {
  check_pair(est, truth);
  const Eigen::Index p = est.adj.rows();
  int d = 0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const bool e1 = est.adj(i, j) != 0, e2 = est.adj(j, i) != 0;
      const bool t1 = truth.adj(i, j) != 0, t2 = truth.adj(j, i) != 0;
      if (e1 != t1 || e2 != t2) ++d;
    }
  return d;
}

std::vector<bool> descendants(const IMat& adj, int node) {
  const int p = static_cast<int>(adj.rows());
  std::vector<bool> mark(p, false);
  std::deque<int> queue{node};
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w = 0; w < p; ++w)
      if (adj(w, v) != 0 && !mark[w]) {
        mark[w] = true;
        queue.push_back(w);
      }
  }
  return mark;
}

bool d_separated(const IMat& adj, int x, int y, const std::vector<int>& z) {
  const int p = static_cast<int>(adj.rows());
  std::vector<bool> in_z(p, false);
  for (int v : z) in_z[v] = true;
  if (in_z[x] || in_z[y]) return true;
  const std::vector<bool> anc = ancestors_of(adj, z);
  // Reachability over (node, arrived-from-child) states.
  std::vector<std::array<bool, 2>> seen(p, {false, false});
  std::deque<std::pair<int, bool>> queue{{x, true}};
  while (!queue.empty()) {
    const auto [v, from_child] = queue.front();
    queue.pop_front();
    if (seen[v][from_child]) continue;
    seen[v][from_child] = true;
    if (v == y) return false;
    if (from_child) {
      if (in_z[v]) continue;
      for (int u = 0; u < p; ++u) {
        if (adj(v, u) != 0) queue.push_back({u, true});
        if (adj(u, v) != 0) queue.push_back({u, false});
      }
    } else {
      if (!in_z[v])
        for (int u = 0; u < p; ++u)
          if (adj(u, v) != 0) queue.push_back({u, false});
      if (anc[v])
        for (int u = 0; u < p; ++u)
          if (adj(v, u) != 0) queue.push_back({u, true});
    }
  }
  return true;
}

int sid(const SummaryDag& est, const SummaryDag& truth) {
  check_pair(est, truth);
  if (!est.is_acyclic() || !truth.is_acyclic()) throw InvalidArgument("SID needs acyclic graphs");
  const IMat& G = truth.adj;
  const int p = static_cast<int>(G.rows());
  std::vector<std::vector<bool>> de(p);
  for (int v = 0; v < p; ++v) de[v] = descendants(G, v);

  int errors = 0;
  for (int i = 0; i < p; ++i) {
    const std::vector<int> pa = est.parents(i);
    for (int j = 0; j < p; ++j) {
      if (j == i) continue;
      if (std::find(pa.begin(), pa.end(), j) != pa.end()) {
        errors += de[i][j] ? 1 : 0;
        continue;
      }
      // Nodes other than i on directed paths from i to j.
      std::vector<int> causal;
      if (de[i][j])
        for (int w = 0; w < p; ++w)
          if (de[i][w] && (w == j || de[w][j])) causal.push_back(w);
      bool forbidden = false;
      for (int z : pa)
        for (int w : causal)
          if (z == w || de[w][z]) forbidden = true;
      if (forbidden) {
        ++errors;
        continue;
      }
      IMat cut = G;
      for (int w : causal) cut(w, i) = 0;
      if (!d_separated(cut, i, j, pa)) ++errors;
    }
  }
  return errors;
}

double ebic_score(double whittle, std::size_t edges, std::size_t p, double window, std::size_t blocks,
                  double gamma) {
  const double e = static_cast<double>(edges);
  const double pairs = 0.5 * static_cast<double>(p) * static_cast<double>(p - 1);
  double score = 2.0 * whittle + e * std::log(window * static_cast<double>(blocks));
  if (pairs > 1.0) score += 2.0 * gamma * e * std::log(pairs);
  return score;
}

LambdaPath ebic_path(const SpectralStack& stack, const TopologicalOrder& order, std::size_t grid_size, double gamma,
                     const AdmmConfig& cfg) {
  if (grid_size < 2) throw InvalidArgument("grid needs at least two points");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
  LambdaPath path;
  path.lambda_star = lambda_empty(stack, order);
  // Degenerate (already diagonal) spectra: any positive grid yields the empty graph.
  const double lmax = path.lambda_star > 0.0 ? path.lambda_star / 2.0 : 1.0;
  const double lmin = lmax / 100.0;
  const double step = std::log(lmax / lmin) / static_cast<double>(grid_size - 1);
  const SpectralStack ps = permute_stack(stack, order.perm);
  path.fits.reserve(grid_size);
  const AdmmState* warm = nullptr;
  for (std::size_t g = 0; g < grid_size; ++g) {
    const double lambda = lmax * std::exp(-step * static_cast<double>(g));
    path.grid.push_back(lambda);
    path.fits.push_back(fredom_fit(stack, order, lambda, cfg, warm));
    warm = &path.fits.back().state;
    const FredomFit& fit = path.fits.back();
    const double w = penalized_objective(fit.state.Z, ps, 0.0);
    path.edges.push_back(static_cast<int>(fit.dag.edge_count()));
    path.scores.push_back(ebic_score(w, fit.dag.edge_count(), stack.dim(), stack.window(), stack.blocks(), gamma));
  }
  for (std::size_t g = 1; g < grid_size; ++g) {
    const double best = path.scores[path.chosen];
    const double tie = 1e-12 * std::max(1.0, std::abs(best));
    if (path.scores[g] < best - tie ||
        (std::abs(path.scores[g] - best) <= tie && path.edges[g] < path.edges[path.chosen]))
      path.chosen = g;
  }
  return path;
}

}  // namespace fredom
