#include "fredom/baseline.hpp"

#include <algorithm>
#include <cmath>

namespace fredom {
namespace {

// Least squares through the normal equations, with a tiny ridge when they are singular.
RMat solve_normal(const RMat& X, const RMat& Y, bool& ridge_used) {
  const RMat G = X.transpose() * X;
  const RMat R = X.transpose() * Y;
  Eigen::LDLT<RMat> ldlt(G);
  const double scale = std::max(1.0, G.diagonal().cwiseAbs().maxCoeff());
  bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
  if (ok) {
    const RVec d = ldlt.vectorD();
    ok = d.minCoeff() > 1e-12 * scale;
  }
  if (ok) return ldlt.solve(R);
  ridge_used = true;
  const RMat Gr = G + 1e-8 * scale * RMat::Identity(G.rows(), G.cols());
  return Gr.ldlt().solve(R);
}

}  // namespace

VarFit fit_var(const TimeSeriesMatrix& x, std::size_t q) {
  x.validate();
  if (!x.is_real) throw InvalidArgument("VAR fitting needs a real series");
  const std::size_t T = x.length(), p = x.dim();
  if (T <= q * p + p) throw InvalidArgument("series too short for the requested lag order");
  const RMat data = x.data.real();
  const Eigen::Index n = static_cast<Eigen::Index>(T - q);
  const Eigen::Index P = static_cast<Eigen::Index>(p);

  RMat X(n, 1 + static_cast<Eigen::Index>(q) * P);
  X.col(0).setOnes();
  for (std::size_t l = 1; l <= q; ++l)
    X.block(0, 1 + static_cast<Eigen::Index>(l - 1) * P, n, P) =
        data.block(static_cast<Eigen::Index>(q - l), 0, n, P);
  const RMat Y = data.bottomRows(n);

  VarFit fit;
  fit.q = q;
  const RMat coef = solve_normal(X, Y, fit.ridge_used);
  fit.intercept = coef.row(0).transpose();
  for (std::size_t l = 0; l < q; ++l)
    fit.A.push_back(coef.block(1 + static_cast<Eigen::Index>(l) * P, 0, P, P).transpose());
  fit.residuals = Y - X * coef;
  return fit;
}

EqVarResult eqvar_from_covariance(const RMat& cov, double prune) {
  const Eigen::Index p = cov.rows();
  if (p == 0 || cov.cols() != p) throw InvalidArgument("covariance must be square and non-empty");
  if (!(prune >= 0.0)) throw InvalidArgument("pruning threshold must be nonnegative");
  EqVarResult out;
  out.order = {order_from_matrix(cov.cast<cplx>()), 1.0};
  out.B0 = RMat::Zero(p, p);
  const Permutation& perm = out.order.perm;
  for (Eigen::Index k = 1; k < p; ++k) {
    const int i = perm[k];
    RMat A(k, k);
    RVec c(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      c(a) = cov(perm[a], i);
      for (Eigen::Index b = 0; b < k; ++b) A(a, b) = cov(perm[a], perm[b]);
    }
    const RVec beta = A.completeOrthogonalDecomposition().solve(c);
    for (Eigen::Index a = 0; a < k; ++a)
      if (std::abs(beta(a)) >= prune) out.B0(i, perm[a]) = beta(a);
  }
  return out;
}

EqVarResult eqvar_dag(const RMat& residuals, double prune) {
  const Eigen::Index n = residuals.rows(), p = residuals.cols();
  if (n <= p) throw InvalidArgument("EqVar needs more observations than variables");
  if (!residuals.allFinite()) throw InvalidArgument("residuals contain non-finite values");
  const RMat c = residuals.rowwise() - residuals.colwise().mean();
  return eqvar_from_covariance(c.transpose() * c / static_cast<double>(n), prune);
}

TseqvarResult tseqvar(const TimeSeriesMatrix& x, std::size_t q, double prune, double lag_thresh) {
  TseqvarResult out;
  out.var = fit_var(x, q);
  EqVarResult eq = eqvar_dag(out.var.residuals, prune);
  out.B0 = eq.B0;
  out.order = eq.order;
  const Eigen::Index p = out.B0.rows();
  const RMat IB = RMat::Identity(p, p) - out.B0;
  for (const RMat& A : out.var.A) out.B.push_back(IB * A);

  out.dag = SummaryDag::from_support(out.B0.cast<cplx>(), x.labels);
  std::vector<std::pair<std::pair<int, int>, double>> candidates;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i == j || out.dag.adj(i, j)) continue;
      double mag = 0.0;
      for (const RMat& B : out.B) mag = std::max(mag, std::abs(B(i, j)));
      if (mag > lag_thresh) candidates.push_back({{static_cast<int>(j), static_cast<int>(i)}, mag});
    }
  out.collapsed = out.dag;
  out.collapsed.adj = add_edges_acyclic(out.dag.adj, std::move(candidates));
  return out;
}

}  // namespace fredom
