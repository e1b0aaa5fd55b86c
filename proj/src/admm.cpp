#include "fredom/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fredom {
namespace {

double off_diagonal_l1(const CMat& z) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      if (i != j) s += std::abs(z(i, j));
  return s;
}

double block_whittle(const CMat& L, const CMat& S, double N) {
  double logdiag = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) logdiag += std::log(L(i, i).real());
  // tr(S L^H L) = tr(L S L^H)
  const double tr = (L * S * L.adjoint()).trace().real();
  return N * (tr - 2.0 * logdiag);
}

void check_stack(const SpectralStack& stack) {
  if (stack.mats.empty()) throw InvalidArgument("spectral stack is empty");
}

}  // namespace

void CholeskyStack::validate() const {
  for (const auto& m : L) {
    if (m.rows() != m.cols()) throw InvalidArgument("Cholesky factor must be square");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (m(i, i).imag() != 0.0 || !(m(i, i).real() > 0.0))
        throw InvalidArgument("Cholesky factor diagonal must be real and positive");
      for (Eigen::Index j = i + 1; j < m.cols(); ++j)
        if (m(i, j) != cplx(0.0, 0.0)) throw InvalidArgument("Cholesky factor must be lower triangular");
    }
  }
}

double whittle_negloglik(const CholeskyStack& L, const SpectralStack& stack) {
  check_stack(stack);
  if (L.L.size() != stack.mats.size()) throw InvalidArgument("factor count does not match spectral stack");
  L.validate();
  const double N = stack.window();
  double total = 0.0;
  for (std::size_t k = 0; k < L.L.size(); ++k) {
    if (L.L[k].rows() != stack.mats[k].rows()) throw InvalidArgument("factor dimension mismatch");
    total += block_whittle(L.L[k], stack.mats[k], N);
  }
  return total;
}

CVec update_L_row(const CMat& A, const CVec& z, const CVec& u, double rho, double N,
                  double diag_rho, const CVec* start, double tol, int max_sweeps) {
  const Eigen::Index k = A.rows();
  if (k < 1 || A.cols() != k || z.size() != k || u.size() != k)
    throw InvalidArgument("row subproblem dimensions do not match");
  if (!(rho > 0.0) || !(N >= 1.0) || diag_rho < 0.0)
    throw InvalidArgument("row subproblem needs rho > 0, N >= 1 and diag_rho >= 0");
  for (Eigen::Index j = 0; j < k; ++j)
    if (!(A(j, j).real() > 0.0))
      throw InvalidArgument("row subproblem matrix has a nonpositive diagonal entry");

  const CVec target = z + u;
  CVec x;
  if (start != nullptr && start->size() == k && (*start)(k - 1).real() > 0.0) {
    x = *start;
    x(k - 1) = x(k - 1).real();
  } else {
    x = CVec::Zero(k);
    x(k - 1) = 1.0 / std::sqrt(A(k - 1, k - 1).real());
  }
  CVec y = A * x;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (Eigen::Index j = 0; j + 1 < k; ++j) {
      const double ajj = A(j, j).real();
      const cplx others = y(j) - ajj * x(j);
      const cplx next = (rho * target(j) - N * others) / (N * ajj + rho);
      const cplx delta = next - x(j);
      if (delta != cplx(0.0, 0.0)) {
        y += A.col(j) * delta;
        x(j) = next;
        change = std::max(change, std::abs(delta));
      }
    }
    const Eigen::Index d = k - 1;
    const double akk = A(d, d).real();
    const double c = (y(d) - akk * x(d)).real();
    const double a = N * akk + diag_rho;
    const double b = N * c - diag_rho * target(d).real();
    const double disc = std::sqrt(b * b + 4.0 * a * N);
    // Positive root of a x^2 + b x - N = 0, written without cancellation.
    const double next = b > 0.0 ? 2.0 * N / (b + disc) : (disc - b) / (2.0 * a);
    const double delta = next - x(d).real();
    if (delta != 0.0) {
      y += A.col(d) * delta;
      x(d) = next;
      change = std::max(change, std::abs(delta));
    }
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    if (change < tol * scale) break;
  }
  return x;
}

RowFactor::RowFactor(const CMat& A, double rho, double N, double diag_rho)
    : rho_(rho), N_(N), diag_rho_(diag_rho), add_(A(A.rows() - 1, A.rows() - 1).real()) {
  const Eigen::Index k = A.rows();
  if (k < 1 || A.cols() != k) throw InvalidArgument("row subproblem dimensions do not match");
  if (!(rho > 0.0) || !(N >= 1.0) || diag_rho < 0.0)
    throw InvalidArgument("row subproblem needs rho > 0, N >= 1 and diag_rho >= 0");
  if (!(add_ > 0.0)) throw InvalidArgument("row subproblem matrix has a nonpositive diagonal entry");
  const Eigen::Index f = k - 1;
  adF_ = A.row(f).head(f);
  if (f > 0) {
    llt_.compute(N * A.topLeftCorner(f, f) + rho * CMat::Identity(f, f));
    b_ = llt_.solve(CVec(N * A.col(f).head(f)));
  }
  lead_ = N * add_ + diag_rho - (f > 0 ? N * (adF_ * b_)(0, 0).real() : 0.0);
}

CVec RowFactor::solve(const CVec& z, const CVec& u) const {
  const Eigen::Index k = adF_.size() + 1;
  if (z.size() != k || u.size() != k) throw InvalidArgument("row subproblem dimensions do not match");
  const Eigen::Index f = k - 1;
  const CVec target = z + u;
  CVec a;
  double lin = -diag_rho_ * target(f).real();
  if (f > 0) {
    a = llt_.solve(CVec(rho_ * target.head(f)));
    lin += N_ * (adF_ * a)(0, 0).real();
  }
  // Positive root of lead x^2 + lin x - N = 0, written without cancellation.
  const double disc = std::sqrt(lin * lin + 4.0 * lead_ * N_);
  const double d = lin > 0.0 ? 2.0 * N_ / (lin + disc) : (disc - lin) / (2.0 * lead_);
  CVec x(k);
  if (f > 0) x.head(f) = a - d * b_;
  x(f) = d;
  return x;
}

cplx soft_threshold(cplx a, double tau) {
  const double mag = std::abs(a);
  if (mag <= tau) return {0.0, 0.0};
  return a * (1.0 - tau / mag);
}

CMat update_Z(const CholeskyStack& L, const std::vector<CMat>& U, double lambda, double rho) {
  if (L.L.empty() || L.L.size() != U.size()) throw InvalidArgument("update_Z needs matching L and U stacks");
  if (!(rho > 0.0) || lambda < 0.0) throw InvalidArgument("update_Z needs rho > 0 and lambda >= 0");
  const Eigen::Index p = L.L.front().rows();
  const double M = static_cast<double>(L.L.size());
  CMat sum = CMat::Zero(p, p);
  for (std::size_t n = 0; n < L.L.size(); ++n) sum += L.L[n] + U[n];
  CMat Z = CMat::Zero(p, p);
  const double tau = lambda / rho;
  for (Eigen::Index i = 0; i < p; ++i) {
    Z(i, i) = sum(i, i).real() / M;
    for (Eigen::Index j = 0; j < i; ++j) Z(i, j) = soft_threshold(sum(i, j), tau) / M;
  }
  return Z;
}

double augmented_lagrangian(const AdmmState& state, const SpectralStack& permuted_stack) {
  double value = whittle_negloglik(state.L, permuted_stack);
  for (std::size_t n = 0; n < state.L.L.size(); ++n)
    value += state.rho * (state.L.L[n] - state.Z + state.U[n]).squaredNorm();
  return value + 2.0 * state.lambda * off_diagonal_l1(state.Z);
}

double penalized_objective(const CMat& Z, const SpectralStack& stack, double lambda) {
  CholeskyStack rep;
  rep.L.assign(stack.mats.size(), Z);
  return whittle_negloglik(rep, stack) + 2.0 * lambda * off_diagonal_l1(Z);
}

CMat inverse_cholesky_factor(const CMat& s) {
  Eigen::LLT<CMat> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("matrix is not positive definite");
  const Eigen::Index p = s.rows();
  CMat G = llt.matrixL();
  CMat L = G.triangularView<Eigen::Lower>().solve(CMat::Identity(p, p));
  for (Eigen::Index i = 0; i < p; ++i) {
    L(i, i) = L(i, i).real();
    for (Eigen::Index j = i + 1; j < p; ++j) L(i, j) = 0.0;
  }
  return L;
}

SpectralStack permute_stack(const SpectralStack& stack, const Permutation& order) {
  if (!is_permutation(order, stack.dim())) throw InvalidArgument("order is not a permutation of the series");
  SpectralStack out = stack;
  for (auto& m : out.mats) m = permute_symmetric(m, order);
  return out;
}

double lambda_empty(const SpectralStack& stack, const TopologicalOrder& order) {
  check_stack(stack);
  const SpectralStack ps = permute_stack(stack, order.perm);
  const Eigen::Index p = static_cast<Eigen::Index>(ps.dim());
  const double N = ps.window();
  const double M = static_cast<double>(ps.blocks());
  RVec mean_diag = RVec::Zero(p);
  for (const auto& s : ps.mats) mean_diag += s.diagonal().real();
  mean_diag /= M;
  double best = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double d = 1.0 / std::sqrt(mean_diag(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      cplx acc = 0.0;
      for (const auto& s : ps.mats) acc += s(i, j);
      best = std::max(best, N * d * std::abs(acc));
    }
  }
  return best;
}

FredomFit fredom_fit(const SpectralStack& stack, const TopologicalOrder& order, double lambda,
                     const AdmmConfig& cfg, const AdmmState* warm_start) {
  check_stack(stack);
  if (lambda < 0.0) throw InvalidArgument("lambda must be nonnegative");
  if (!(cfg.rho > 0.0)) throw InvalidArgument("rho must be positive");
  const SpectralStack ps = permute_stack(stack, order.perm);
  const Eigen::Index p = static_cast<Eigen::Index>(ps.dim());
  const std::size_t M = ps.blocks();
  const double N = ps.window();

  AdmmState st;
  if (warm_start != nullptr && warm_start->L.L.size() == M && warm_start->Z.rows() == p) {
    st = *warm_start;
    st.iterations = 0;
  } else {
    st.L.L.resize(M);
    st.U.assign(M, CMat::Zero(p, p));
    st.Z = CMat::Zero(p, p);
    st.rho = cfg.rho;
    for (std::size_t n = 0; n < M; ++n) {
      const double eps = 1e-8 * ps.mats[n].trace().real() / static_cast<double>(p);
      st.L.L[n] = inverse_cholesky_factor(ps.mats[n] + eps * CMat::Identity(p, p));
      st.Z += st.L.L[n];
    }
    st.Z /= static_cast<double>(M);
  }
  st.lambda = lambda;

  std::vector<RowFactor> factors;
  double factors_rho = 0.0;
  AdmmDiagnostics diag;
  const double n_entries = static_cast<double>(M) * static_cast<double>(p * (p + 1) / 2);
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const double al_start = augmented_lagrangian(st, ps);

    // (a) rows of every block factor; the consensus target is Z - U.
    if (cfg.exact_rows && factors_rho != st.rho) {
      factors.clear();
      for (std::size_t n = 0; n < M; ++n)
        for (Eigen::Index i = 0; i < p; ++i)
          // Rows of L enter as conj(row) in x^H S x; the transpose of S absorbs it.
          factors.emplace_back(ps.mats[n].topLeftCorner(i + 1, i + 1).transpose(), st.rho, N, st.rho);
      factors_rho = st.rho;
    }
    for (std::size_t n = 0; n < M; ++n) {
      CMat& Ln = st.L.L[n];
      for (Eigen::Index i = 0; i < p; ++i) {
        const Eigen::Index len = i + 1;
        const CVec z = st.Z.row(i).head(len).transpose();
        const CVec u = -st.U[n].row(i).head(len).transpose();
        CVec row;
        if (cfg.exact_rows) {
          row = factors[n * static_cast<std::size_t>(p) + static_cast<std::size_t>(i)].solve(z, u);
        } else {
          const CMat A = ps.mats[n].topLeftCorner(len, len).transpose();
          const CVec start = Ln.row(i).head(len).transpose();
          row = update_L_row(A, z, u, st.rho, N, st.rho, &start, cfg.row_tol, cfg.row_max_sweeps);
        }
        Ln.row(i).head(len) = row.transpose();
      }
    }
    const double al_after_l = augmented_lagrangian(st, ps);

    // (b)
    const CMat z_old = st.Z;
    st.Z = update_Z(st.L, st.U, lambda, st.rho);
    const double al_after_z = augmented_lagrangian(st, ps);

    // (c)
    double primal_sq = 0.0;
    double l_norm_sq = 0.0;
    double u_norm_sq = 0.0;
    for (std::size_t n = 0; n < M; ++n) {
      const CMat r = st.L.L[n] - st.Z;
      st.U[n] += r;
      primal_sq += r.squaredNorm();
      l_norm_sq += st.L.L[n].squaredNorm();
      u_norm_sq += st.U[n].squaredNorm();
    }
    st.primal_residual = std::sqrt(primal_sq);
    st.dual_residual = st.rho * std::sqrt(static_cast<double>(M)) * (st.Z - z_old).norm();
    st.iterations = iter + 1;

    diag.lagrangian_start.push_back(al_start);
    diag.lagrangian_after_l.push_back(al_after_l);
    diag.lagrangian_after_z.push_back(al_after_z);
    const double scale = std::max(1.0, std::abs(al_start));
    diag.max_monotonicity_violation =
        std::max({diag.max_monotonicity_violation, (al_after_l - al_start) / scale,
                  (al_after_z - al_after_l) / scale});

    const double eps_pri =
        std::sqrt(n_entries) * cfg.abs_tol +
        cfg.rel_tol * std::max(std::sqrt(l_norm_sq), std::sqrt(static_cast<double>(M)) * st.Z.norm());
    const double eps_dual = std::sqrt(n_entries) * cfg.abs_tol + cfg.rel_tol * st.rho * std::sqrt(u_norm_sq);
    if (st.primal_residual < eps_pri && st.dual_residual < eps_dual) {
      diag.converged = true;
      break;
    }
    if (cfg.residual_balancing) {
      if (st.primal_residual > 10.0 * st.dual_residual) {
        st.rho *= 2.0;
        for (auto& u : st.U) u /= 2.0;
      } else if (st.dual_residual > 10.0 * st.primal_residual) {
        st.rho /= 2.0;
        for (auto& u : st.U) u *= 2.0;
      }
    }
  }
  diag.iterations = st.iterations;
  diag.primal_residual = st.primal_residual;
  diag.dual_residual = st.dual_residual;
  diag.objective = penalized_objective(st.Z, ps, lambda);

  FredomFit fit;
  fit.Z = unpermute_symmetric(st.Z, order.perm);
  fit.dag = SummaryDag::from_support(fit.Z);
  fit.order = order;
  fit.lambda = lambda;
  fit.diagnostics = std::move(diag);
  fit.state = std::move(st);
  return fit;
}

}  // namespace fredom
