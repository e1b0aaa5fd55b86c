#pragma once

#include <vector>

#include "fredom/dag.hpp"
#include "fredom/ordering.hpp"
#include "fredom/types.hpp"

namespace fredom {

struct VarFit {
  /// Lag coefficient matrices A_1..A_q.
  std::vector<RMat> A;
  RVec intercept;
  /// (T - q) x p.
  RMat residuals;
  std::size_t q = 0;
  /// Set when the normal equations needed a ridge term.
  bool ridge_used = false;
};

/// Per-equation least squares of x(t) on an intercept and x(t-1..t-q).
VarFit fit_var(const TimeSeriesMatrix& x, std::size_t q);

struct EqVarResult {
  TopologicalOrder order;
  /// B0(i, j) is the effect of j on i.
  RMat B0;
};

/// Equal-variance ordering on the residual covariance, then least squares of each
/// node on its predecessors with |coefficient| < prune set to zero.
EqVarResult eqvar_dag(const RMat& residuals, double prune = 0.1);
/// Same, starting from a covariance matrix.
EqVarResult eqvar_from_covariance(const RMat& cov, double prune = 0.1);

struct TseqvarResult {
  /// Support of B0.
  SummaryDag dag;
  /// B0 plus lag edges with |B_i| > lag_thresh, cycles avoided.
  SummaryDag collapsed;
  RMat B0;
  /// B_i = (I - B0) A_i.
  std::vector<RMat> B;
  VarFit var;
  TopologicalOrder order;
};

TseqvarResult tseqvar(const TimeSeriesMatrix& x, std::size_t q, double prune = 0.1, double lag_thresh = 0.1);

}  // namespace fredom
