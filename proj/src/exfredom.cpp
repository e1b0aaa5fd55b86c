#include "fredom/exfredom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/MatrixFunctions>

#include "fredom/admm.hpp"

namespace fredom {
namespace {

// Real embedding of the off-diagonal entries: (Re, Im) pairs in row-major order.
RVec pack(const CMat& m) {
  const Eigen::Index p = m.rows();
  RVec v(2 * p * (p - 1));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (i != j) {
        v(k++) = m(i, j).real();
        v(k++) = m(i, j).imag();
      }
  return v;
}

CMat unpack(const RVec& v, Eigen::Index p) {
  CMat m = CMat::Zero(p, p);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (i != j) {
        m(i, j) = cplx(v(k), v(k + 1));
        k += 2;
      }
  return m;
}

// A real function's gradient in the embedding is twice its Wirtinger gradient.
RVec pack_gradient(const CMat& wirtinger) { return 2.0 * pack(wirtinger); }

RMat squared_moduli(const CMat& B) { return B.cwiseAbs2(); }

// Sum of d d^H over the rows, divided by the row count.
CMat gram(const CMat& block) { return block.transpose() * block.conjugate() / static_cast<double>(block.rows()); }

double gram_loss(const CMat& B, const CMat& G) {
  const CMat R = CMat::Identity(B.rows(), B.cols()) - B;
  return 0.5 * (R * G * R.adjoint()).trace().real();
}

CMat gram_loss_grad(const CMat& B, const CMat& G) {
  return -0.5 * (CMat::Identity(B.rows(), B.cols()) - B) * G;
}

CMat soft_threshold_off(const CMat& z, double tau) {
  CMat out = CMat::Zero(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      if (i != j) out(i, j) = soft_threshold(z(i, j), tau);
  return out;
}

struct ZProblem {
  const std::vector<CMat>& B;
  const std::vector<CMat>& U;
  double alpha, rho1, rho2;

  // One matrix exponential per call; fills the Wirtinger gradient when asked.
  double eval(const CMat& Z, CMat* wirtinger = nullptr) const {
    const RMat E = squared_moduli(Z).exp();
    const double h = std::max(0.0, E.trace() - static_cast<double>(Z.rows()));
    double v = alpha * h + rho1 * h * h;
    for (std::size_t n = 0; n < B.size(); ++n) v += rho2 * (B[n] - Z + U[n]).squaredNorm();
    if (wirtinger) {
      CMat& g = *wirtinger;
      g = (alpha + 2.0 * rho1 * h) * E.transpose().cast<cplx>().cwiseProduct(Z);
      for (std::size_t n = 0; n < B.size(); ++n) g -= rho2 * (B[n] - Z + U[n]);
      g.diagonal().setZero();
    }
    return v;
  }
};

// Row-wise normal equations of the block step: b_F (G_FF / 2 + rho2 I) = G_iF / 2 + rho2 c_F.
class BlockStep {
 public:
  BlockStep(const CMat& G, double rho2) : G_(G), rho2_(rho2) {
    const Eigen::Index p = G.rows();
    for (Eigen::Index i = 0; i < p; ++i) {
      CMat A(p - 1, p - 1);
      for (Eigen::Index a = 0, ra = 0; a < p; ++a) {
        if (a == i) continue;
        for (Eigen::Index b = 0, rb = 0; b < p; ++b) {
          if (b == i) continue;
          A(ra, rb++) = 0.5 * G(a, b) + (a == b ? cplx(rho2, 0.0) : cplx(0.0, 0.0));
        }
        ++ra;
      }
      solvers_.emplace_back(A);
    }
  }

  CMat solve(const CMat& C) const {
    const Eigen::Index p = G_.rows();
    CMat B = CMat::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      // Transposed system: (G_FF / 2 + rho2 I)^T b_F^T = rhs^T, and G_FF^T = conj(G_FF).
      CVec rhs(p - 1);
      for (Eigen::Index a = 0, ra = 0; a < p; ++a)
        if (a != i) rhs(ra++) = 0.5 * G_(i, a) + rho2_ * C(i, a);
      const CVec b = solvers_[static_cast<std::size_t>(i)].solve(rhs.conjugate()).conjugate();
      for (Eigen::Index a = 0, ra = 0; a < p; ++a)
        if (a != i) B(i, a) = b(ra++);
    }
    return B;
  }

 private:
  CMat G_;
  double rho2_;
  std::vector<Eigen::LLT<CMat>> solvers_;
};

double off_l1(const CMat& Z) { return Z.cwiseAbs().sum() - Z.diagonal().cwiseAbs().sum(); }

// Accelerated proximal gradient for smooth + lambda * off-diagonal l1, with
// backtracking, restart on objective increase and a fixed diagonal metric. The
// metric follows the per-entry curvature of the acyclicity term, which becomes
// very uneven once rho1 is large.
CMat proximal_refine(const ZProblem& prob, CMat Z, double lambda) {
  const double base = 2.0 * prob.rho2 * static_cast<double>(prob.B.size());
  const RMat A = squared_moduli(Z);
  const RMat E = A.exp();
  const double h = std::max(0.0, E.trace() - static_cast<double>(Z.rows()));
  const RMat hw = E.transpose().cwiseProduct(A.cwiseSqrt());
  const RMat curvature = (base + 2.0 * (prob.alpha + 2.0 * prob.rho1 * h) * E.transpose().array() +
                          8.0 * prob.rho1 * hw.array().square())
                             .matrix();
  const RMat scale = (base / curvature.array()).matrix();

  auto prox = [&](const CMat& X, double t) {
    CMat out = CMat::Zero(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = 0; j < X.cols(); ++j)
        if (i != j) out(i, j) = soft_threshold(X(i, j), t * scale(i, j) * lambda);
    return out;
  };

  double t = 1.0 / base;
  double F = prob.eval(Z) + lambda * off_l1(Z);
  CMat Y = Z, wirt;
  double theta = 1.0;
  for (int iter = 0; iter < 2000; ++iter) {
    const double fy = prob.eval(Y, &wirt);
    const CMat grad = 2.0 * wirt;
    CMat next;
    double fn = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      next = prox(Y - t * scale.cast<cplx>().cwiseProduct(grad), t);
      const CMat step = next - Y;
      fn = prob.eval(next);
      const double model = fy + (grad.conjugate().cwiseProduct(step)).sum().real() +
                           (step.cwiseAbs2().array() / scale.array()).sum() / (2.0 * t);
      if (std::isfinite(fn) && fn <= model + 1e-14 * std::abs(fy)) break;
      t *= 0.5;
    }
    const double Fn = fn + lambda * off_l1(next);
    if (Fn > F && theta > 1.0) {
      theta = 1.0;
      Y = Z;
      continue;
    }
    const double moved = (next - Z).cwiseAbs().maxCoeff();
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    Y = next + ((theta - 1.0) / theta_next) * (next - Z);
    theta = theta_next;
    Z = std::move(next);
    F = std::min(F, Fn);
    if (moved <= 1e-10 * std::max(1.0, Z.cwiseAbs().maxCoeff())) break;
    t *= 1.1;
  }
  return Z;
}

}  // namespace

double acyclicity(const CMat& B) {
  if (B.rows() != B.cols()) throw InvalidArgument("acyclicity needs a square matrix");
  const RMat A = squared_moduli(B);
  const RMat E = A.exp();
  return std::max(0.0, E.trace() - static_cast<double>(B.rows()));
}

CMat acyclicity_grad(const CMat& B) {
  if (B.rows() != B.cols()) throw InvalidArgument("acyclicity needs a square matrix");
  const RMat E = squared_moduli(B).exp();
  return E.transpose().cast<cplx>().cwiseProduct(B);
}

double block_least_squares(const CMat& B, const CMat& block) {
  if (B.rows() != B.cols() || block.cols() != B.rows() || block.rows() == 0)
    throw InvalidArgument("block_least_squares shape mismatch");
  const CMat R = block - block * B.transpose();
  return R.squaredNorm() / (2.0 * static_cast<double>(block.rows()));
}

CMat block_least_squares_grad(const CMat& B, const CMat& block) {
  if (B.rows() != B.cols() || block.cols() != B.rows() || block.rows() == 0)
    throw InvalidArgument("block_least_squares shape mismatch");
  return gram_loss_grad(B, gram(block));
}

std::vector<CMat> split_frequency_blocks(const FourierStack& d, std::size_t M) {
  const std::size_t T = d.length();
  if (M < 1) throw InvalidArgument("block count must be positive");
  const std::size_t usable = d.source_real ? (T - 1) / 2 : T - 1;
  const std::size_t per = usable / M;
  if (per < 1) throw InvalidArgument("too few frequencies for the requested block count");
  std::vector<CMat> blocks;
  for (std::size_t b = 0; b < M; ++b)
    blocks.push_back(d.coeffs.middleRows(static_cast<Eigen::Index>(b * per), static_cast<Eigen::Index>(per)));
  return blocks;
}

CMat solve_block_step(const CMat& block, const CMat& C, double rho2) {
  if (block.cols() != C.rows() || C.rows() != C.cols() || block.rows() == 0 || !(rho2 > 0.0))
    throw InvalidArgument("invalid block step");
  return BlockStep(gram(block), rho2).solve(C);
}

ExfredomFit exfredom_fit(const FourierStack& d, std::size_t M, double lambda, const ExfredomConfig& cfg) {
  return exfredom_fit_blocks(split_frequency_blocks(d, M), lambda, cfg);
}

ExfredomFit exfredom_fit_blocks(const std::vector<CMat>& blocks, double lambda, const ExfredomConfig& cfg) {
  if (blocks.empty()) throw InvalidArgument("no data blocks");
  if (lambda < 0.0) throw InvalidArgument("lambda must be nonnegative");
  if (!(cfg.rho1_init > 0.0) || !(cfg.rho2 > 0.0)) throw InvalidArgument("penalty weights must be positive");
  const Eigen::Index p = blocks.front().cols();
  if (p < 2) throw InvalidArgument("ExFreDom needs at least two series");
  for (const auto& b : blocks)
    if (b.cols() != p || b.rows() == 0 || !b.allFinite()) throw InvalidArgument("malformed data block");
  const std::size_t M = blocks.size();

  std::vector<CMat> G;
  std::vector<BlockStep> steps;
  for (const auto& b : blocks) {
    G.push_back(gram(b));
    steps.emplace_back(G.back(), cfg.rho2);
  }

  WeightStack w;
  w.B.assign(M, CMat::Zero(p, p));
  w.U.assign(M, CMat::Zero(p, p));
  w.Z = CMat::Zero(p, p);
  AugLagState al{0.0, cfg.rho1_init, cfg.rho2, 0.0};
  ExfredomDiagnostics diag;

  double h_prev = std::numeric_limits<double>::infinity();
  const double tol_scale = std::sqrt(static_cast<double>(M));
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    double residual = 0.0;
    for (int inner = 0; inner < cfg.max_inner; ++inner) {
      // (a) blockwise least squares pulled towards Z - U.
      for (std::size_t n = 0; n < M; ++n) {
        const CMat C = w.Z - w.U[n];
        if (cfg.exact_block_step) {
          w.B[n] = steps[n].solve(C);
        } else {
          const SmoothObjective f = [&](const RVec& x, RVec& grad) {
            const CMat B = unpack(x, p);
            const double v = gram_loss(B, G[n]) + al.rho2 * (B - C).squaredNorm();
            grad = pack_gradient(gram_loss_grad(B, G[n]) + al.rho2 * (B - C));
            return v;
          };
          w.B[n] = unpack(lbfgs_minimize(f, pack(w.B[n]), cfg.lbfgs).x, p);
        }
        if (!w.B[n].allFinite()) throw NumericalError("ExFreDom diverged: block step is not finite");
      }

      // (b) proximal steps on the composite problem, optionally after L-BFGS on its smooth part.
      const CMat z_old = w.Z;
      const ZProblem prob{w.B, w.U, al.alpha, al.rho1, al.rho2};
      CMat z_start = w.Z;
      if (cfg.lbfgs_z_warmstart) {
        const SmoothObjective fz = [&](const RVec& x, RVec& grad) {
          CMat wirt;
          const double v = prob.eval(unpack(x, p), &wirt);
          grad = pack_gradient(wirt);
          return v;
        };
        const LbfgsResult rz = lbfgs_minimize(fz, pack(w.Z), cfg.lbfgs);
        if (!std::isfinite(rz.value)) throw NumericalError("ExFreDom diverged: consensus objective is not finite");
        z_start = soft_threshold_off(unpack(rz.x, p), lambda / (2.0 * al.rho2 * static_cast<double>(M)));
      }
      w.Z = proximal_refine(prob, z_start, lambda);
      if (!w.Z.allFinite()) throw NumericalError("ExFreDom diverged: consensus step is not finite");

      // (c)
      double primal_sq = 0.0;
      for (std::size_t n = 0; n < M; ++n) {
        const CMat r = w.B[n] - w.Z;
        w.U[n] += r;
        primal_sq += r.squaredNorm();
      }
      residual = std::sqrt(primal_sq) / tol_scale;
      const double dual = al.rho2 * (w.Z - z_old).norm();
      ++diag.inner_iterations;
      if (residual < cfg.consensus_tol && dual < cfg.consensus_tol) break;
    }

    // (d)
    const double h = acyclicity(w.Z);
    al.h_value = h;
    diag.h_trace.push_back(h);
    diag.outer_iterations = outer + 1;
    diag.consensus_residual = residual;
    if (h < cfg.h_tol && residual < cfg.consensus_tol) {
      diag.converged = true;
      break;
    }
    al.alpha += al.rho1 * h;
    if (h >= cfg.h_tol && h > 0.25 * h_prev) al.rho1 = std::min(al.rho1 * 10.0, cfg.rho1_max);
    h_prev = h;
    if (al.rho1 >= cfg.rho1_max && h >= cfg.h_tol) break;
  }

  ExfredomFit fit;
  std::vector<std::pair<std::pair<int, int>, double>> candidates;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (i != j && std::abs(w.Z(i, j)) > cfg.w_thresh)
        candidates.push_back({{static_cast<int>(j), static_cast<int>(i)}, std::abs(w.Z(i, j))});
  const IMat adj = add_edges_acyclic(IMat::Zero(p, p), candidates);
  fit.dag.adj = adj;
  fit.dag.labels = default_labels(static_cast<std::size_t>(p));
  CMat kept = CMat::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (adj(i, j) != 0) kept(i, j) = w.Z(i, j);
  fit.dag.weights = kept;
  diag.edges_removed = static_cast<int>(candidates.size()) - static_cast<int>(fit.dag.edge_count());
  fit.Z = w.Z;
  fit.weights = std::move(w);
  fit.auglag = al;
  fit.diagnostics = std::move(diag);
  return fit;
}

}  // namespace fredom
