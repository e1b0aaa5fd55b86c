#pragma once

#include <vector>

#include "fredom/admm.hpp"
#include "fredom/dag.hpp"

namespace fredom {

/// Edge additions, deletions and reversals turning `est` into `truth`
/// (a reversal counts once).
int shd(const SummaryDag& est, const SummaryDag& truth);

/// Structural intervention distance: ordered pairs (i, j) whose interventional
/// distribution is wrong when inferred from `est` by adjusting for pa_est(i).
int sid(const SummaryDag& est, const SummaryDag& truth);

/// Descendants of `node` in the DAG (excluding the node itself).
std::vector<bool> descendants(const IMat& adj, int node);

/// True when x and y are d-separated given z in the DAG.
bool d_separated(const IMat& adj, int x, int y, const std::vector<int>& z);

struct LambdaPath {
  /// Strictly descending penalty values.
  std::vector<double> grid;
  std::vector<double> scores;
  std::vector<int> edges;
  std::size_t chosen = 0;
  double lambda_star = 0.0;
  std::vector<FredomFit> fits;
};

/// 2 W + |E| log(N M) + 2 gamma |E| log(p (p - 1) / 2).
double ebic_score(double whittle, std::size_t edges, std::size_t p, double window, std::size_t blocks,
                  double gamma);

/// Warm-started fits on a log grid from lambda*/2 down to lambda*/200, scored by eBIC.
LambdaPath ebic_path(const SpectralStack& stack, const TopologicalOrder& order, std::size_t grid_size = 20,
                     double gamma = 0.5, const AdmmConfig& cfg = {});

}  // namespace fredom
