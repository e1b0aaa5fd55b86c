#include <cmath>
#include <random>

#include "doctest.h"
#include "fredom/admm.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fredom;
using namespace fredom::testing;

namespace {

SpectralStack make_stack(std::vector<CMat> mats, int half_window) {
  SpectralStack s;
  s.half_window = half_window;
  for (std::size_t k = 0; k < mats.size(); ++k) s.freqs.push_back(0.01 * double(k + 1));
  s.mats = std::move(mats);
  return s;
}

SpectralStack random_stack(std::mt19937_64& rng, Eigen::Index p, std::size_t M, int half_window) {
  std::vector<CMat> mats;
  for (std::size_t k = 0; k < M; ++k) mats.push_back(random_hpd(rng, p));
  return make_stack(std::move(mats), half_window);
}

TopologicalOrder identity_order(std::size_t p) { return {identity_permutation(p), 1.0}; }

CMat random_lower_factor(std::mt19937_64& rng, Eigen::Index p) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  CMat L = random_complex(rng, p, p).triangularView<Eigen::StrictlyLower>();
  for (Eigen::Index i = 0; i < p; ++i) L(i, i) = u(rng);
  return L;
}

// Real embedding: (Re x_0, Im x_0, ..., Re x_{k-2}, Im x_{k-2}, x_{k-1}).
CVec from_real(const RVec& v, Eigen::Index k) {
  CVec x(k);
  for (Eigen::Index j = 0; j + 1 < k; ++j) x(j) = cplx(v(2 * j), v(2 * j + 1));
  x(k - 1) = v(2 * (k - 1));
  return x;
}

RVec to_real(const CVec& x) {
  const Eigen::Index k = x.size();
  RVec v(2 * k - 1);
  for (Eigen::Index j = 0; j + 1 < k; ++j) {
    v(2 * j) = x(j).real();
    v(2 * j + 1) = x(j).imag();
  }
  v(2 * (k - 1)) = x(k - 1).real();
  return v;
}

double row_objective(const CMat& A, const CVec& target, double rho, double N, double diag_rho, const CVec& x) {
  const Eigen::Index k = x.size();
  double value = N * ((x.adjoint() * A * x)(0, 0).real() - 2.0 * std::log(x(k - 1).real()));
  for (Eigen::Index j = 0; j + 1 < k; ++j) value += rho * std::norm(x(j) - target(j));
  return value + diag_rho * std::pow(x(k - 1).real() - target(k - 1).real(), 2);
}

// Every ADMM run must pass this health check.
void check_health(const FredomFit& fit, const AdmmConfig& cfg) {
  CHECK(fit.diagnostics.max_monotonicity_violation <= 1e-8);
  if (fit.diagnostics.converged) {
    const auto& st = fit.state;
    const double M = double(st.L.L.size());
    const double p = double(st.Z.rows());
    double l_norm = 0.0;
    for (const auto& l : st.L.L) l_norm += l.squaredNorm();
    const double tol = std::sqrt(M * p * (p + 1) / 2) * cfg.abs_tol +
                       cfg.rel_tol * std::max(std::sqrt(l_norm), std::sqrt(M) * st.Z.norm());
    CHECK(fit.diagnostics.primal_residual < tol);
  }
  CHECK_NOTHROW(fit.state.L.validate());
  for (Eigen::Index i = 0; i < fit.state.Z.rows(); ++i)
    for (Eigen::Index j = i + 1; j < fit.state.Z.cols(); ++j) CHECK(fit.state.Z(i, j) == cplx(0.0, 0.0));
  CHECK(fit.dag.is_acyclic());
}

AdmmConfig tight() {
  AdmmConfig cfg;
  cfg.abs_tol = 1e-10;
  cfg.rel_tol = 1e-10;
  cfg.max_iter = 20000;
  cfg.row_tol = 1e-13;
  cfg.row_max_sweeps = 2000;
  return cfg;
}

}  // namespace

TEST_CASE("whittle: identity and scalar cases") {
  SpectralStack s = make_stack(std::vector<CMat>(3, CMat::Identity(4, 4)), 2);
  CholeskyStack L{std::vector<CMat>(3, CMat::Identity(4, 4))};
  CHECK(whittle_negloglik(L, s) == doctest::Approx(3.0 * 5.0 * 4.0));

  SpectralStack one = make_stack({CMat::Constant(1, 1, 2.5)}, 1);
  for (double l : {0.3, 1.0 / std::sqrt(2.5), 2.0}) {
    CholeskyStack f{{CMat::Constant(1, 1, l)}};
    CHECK(whittle_negloglik(f, one) == doctest::Approx(3.0 * (2.5 * l * l - 2.0 * std::log(l))));
  }
  CholeskyStack bad{{CMat::Constant(1, 1, -1.0)}};
  CHECK_THROWS_AS(whittle_negloglik(bad, one), InvalidArgument);
}

TEST_CASE("whittle matches a dense trace/determinant oracle") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    const SpectralStack s = random_stack(rng, 5, 3, 1);
    CholeskyStack L;
    double oracle = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      L.L.push_back(random_lower_factor(rng, 5));
      const CMat omega = L.L.back().adjoint() * L.L.back();
      oracle += 3.0 * ((s.mats[k] * omega).trace().real() - std::log(omega.determinant().real()));
    }
    CHECK(whittle_negloglik(L, s) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("update_L_row worked examples") {
  const CVec z1 = CVec::Zero(1);
  CHECK(update_L_row(CMat::Constant(1, 1, 4.0), z1, z1, 1.0, 3.0)(0).real() == doctest::Approx(0.5));
  const CVec z2 = CVec::Zero(2);
  const CVec x = update_L_row(CMat::Identity(2, 2), z2, z2, 1.0, 1.0);
  CHECK(std::abs(x(0)) < 1e-12);
  CHECK(x(1).real() == doctest::Approx(1.0));
  CHECK(x(1).imag() == 0.0);
  CMat bad = CMat::Identity(2, 2);
  bad(0, 0) = 0.0;
  CHECK_THROWS_AS(update_L_row(bad, z2, z2, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("update_L_row: Wirtinger stationarity and numerical-minimizer oracle") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int rep = 0; rep < 25; ++rep) {
    const Eigen::Index k = 4;
    const CMat A = random_hpd(rng, k, 0.2);
    const CVec z = random_complex(rng, k, 1);
    const CVec uu = random_complex(rng, k, 1);
    const double rho = u(rng);
    const double N = 1.0 + 2.0 * (rep % 4);
    const double diag_rho = (rep % 2) ? rho : 0.0;
    const CVec x = update_L_row(A, z, uu, rho, N, diag_rho, nullptr, 1e-14, 5000);
    const CVec target = z + uu;

    // d/dx_j^* of the objective, j off-diagonal.
    const CVec Ax = A * x;
    for (Eigen::Index j = 0; j + 1 < k; ++j) CHECK(std::abs(N * Ax(j) + rho * (x(j) - target(j))) < 1e-6);
    const double dd = 2.0 * N * (Ax(k - 1).real() - 1.0 / x(k - 1).real()) +
                      2.0 * diag_rho * (x(k - 1).real() - target(k - 1).real());
    CHECK(std::abs(dd) < 1e-6);

    const auto f = [&](const RVec& v) { return row_objective(A, target, rho, N, diag_rho, from_real(v, k)); };
    const auto feasible = [&](const RVec& v) { return v(v.size() - 1) > 0.0; };
    RVec v0 = RVec::Zero(2 * k - 1);
    v0(2 * k - 2) = 1.0;
    const CVec ref = from_real(fd_newton_minimize(f, v0, feasible), k);
    CHECK((x - ref).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("soft threshold and update_Z") {
  const cplx s = soft_threshold(cplx(3, 4), 2.5);
  CHECK(std::abs(s - cplx(1.5, 2.0)) < 1e-15);
  CHECK(soft_threshold(cplx(0.3, 0.4), 0.5) == cplx(0, 0));
  // Subgradient condition 0 in -(a - z) + tau z / |z|.
  CHECK(std::abs(-(cplx(3, 4) - s) + 2.5 * s / std::abs(s)) < 1e-14);

  std::mt19937_64 rng(47);
  CholeskyStack L;
  std::vector<CMat> U;
  for (int n = 0; n < 4; ++n) {
    L.L.push_back(random_lower_factor(rng, 4));
    U.push_back(CMat(random_complex(rng, 4, 4).triangularView<Eigen::Lower>()));
  }
  CMat mean = CMat::Zero(4, 4);
  for (int n = 0; n < 4; ++n) mean += (L.L[n] + U[n]) / 4.0;
  const CMat z0 = update_Z(L, U, 0.0, 2.0);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(z0(i, i).real() == doctest::Approx(mean(i, i).real()));
    for (Eigen::Index j = 0; j < i; ++j) CHECK(std::abs(z0(i, j) - mean(i, j)) < 1e-14);
  }
  const CMat zbig = update_Z(L, U, 1e6, 2.0);
  CHECK(zbig.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() == 0.0);
}

TEST_CASE("update_Z satisfies the subgradient optimality condition") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int rep = 0; rep < 50; ++rep) {
    CholeskyStack L;
    std::vector<CMat> U;
    const int M = 1 + rep % 5;
    for (int n = 0; n < M; ++n) {
      L.L.push_back(random_lower_factor(rng, 4));
      U.push_back(CMat(random_complex(rng, 4, 4).triangularView<Eigen::Lower>()));
    }
    const double lambda = u(rng), rho = 0.5 + u(rng);
    const CMat Z = update_Z(L, U, lambda, rho);
    for (Eigen::Index i = 0; i < 4; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        // sum_n (L + U - Z) must lie in (lambda / rho) * subdifferential of |Z_ij|.
        cplx r = 0.0;
        for (int n = 0; n < M; ++n) r += L.L[n](i, j) + U[n](i, j) - Z(i, j);
        if (Z(i, j) != cplx(0, 0)) {
          CHECK(std::abs(r - (lambda / rho) * Z(i, j) / std::abs(Z(i, j))) < 1e-8);
        } else {
          CHECK(std::abs(r) <= lambda / rho + 1e-8);
        }
      }
    }
  }
}

TEST_CASE("inverse_cholesky_factor") {
  std::mt19937_64 rng(59);
  const CMat s = random_hpd(rng, 5);
  const CMat L = inverse_cholesky_factor(s);
  CHECK((L.adjoint() * L - s.inverse()).norm() < 1e-10);
  CholeskyStack st{{L}};
  CHECK_NOTHROW(st.validate());
  CHECK_THROWS_AS(inverse_cholesky_factor(-CMat::Identity(2, 2)), NumericalError);
}

TEST_CASE("fit on scaled identity spectra gives the empty graph") {
  const double c = 4.0;
  const SpectralStack s = make_stack(std::vector<CMat>(5, c * CMat::Identity(3, 3)), 2);
  const AdmmConfig cfg;
  const FredomFit fit = fredom_fit(s, identity_order(3), 10.0, cfg);
  CHECK(fit.dag.edge_count() == 0);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(fit.Z(i, i).real() == doctest::Approx(1.0 / std::sqrt(c)).epsilon(1e-5));
  check_health(fit, cfg);
}

TEST_CASE("fit on exact three-node spectra recovers the support") {
  CMat B = CMat::Zero(3, 3);
  B(1, 0) = cplx(0.8, -0.3);
  B(2, 1) = cplx(-0.5, 0.6);
  // Node order 2, 0, 1 in the labels used by the fit.
  const Permutation truth{2, 0, 1};
  const CMat Bo = unpermute_symmetric(B, truth);
  const CMat K = (CMat::Identity(3, 3) - Bo).inverse();
  const SpectralStack s = make_stack(std::vector<CMat>(4, K * K.adjoint()), 0);
  const TopologicalOrder order{truth, 1.0};
  const double lam = 0.01 * lambda_empty(s, order);
  const AdmmConfig cfg = tight();
  const FredomFit fit = fredom_fit(s, order, lam, cfg);
  CHECK(fit.diagnostics.converged);
  check_health(fit, cfg);
  CHECK(fit.dag.edge_count() == 2);
  CHECK(fit.dag.has_edge(2, 0));
  CHECK(fit.dag.has_edge(0, 1));
}

TEST_CASE("single block without penalty returns the inverse Cholesky factor") {
  std::mt19937_64 rng(61);
  for (int rep = 0; rep < 5; ++rep) {
    const SpectralStack s = random_stack(rng, 4, 1, 2);
    const AdmmConfig cfg = tight();
    const FredomFit fit = fredom_fit(s, identity_order(4), 0.0, cfg);
    CHECK(fit.diagnostics.converged);
    check_health(fit, cfg);
    // Oracle: the unique lower-triangular, positive-diagonal L with L^H L = S^{-1}.
    const CMat Z = fit.Z;
    CHECK((Z.adjoint() * Z - s.mats[0].inverse()).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(fit.dag.edge_count() == 6);

    // Finite-difference stationarity of W on the lower-triangular coordinates.
    const double N = s.window();
    const auto W = [&](const CMat& l) {
      double logdiag = 0.0;
      for (Eigen::Index i = 0; i < 4; ++i) logdiag += std::log(l(i, i).real());
      return N * ((l * s.mats[0] * l.adjoint()).trace().real() - 2.0 * logdiag);
    };
    const double scale = 2.0 * N * ((Z * s.mats[0]).norm() + Z.diagonal().cwiseInverse().norm());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < 4; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        for (cplx dir : {cplx(1, 0), cplx(0, 1)}) {
          if (i == j && dir.imag() != 0.0) continue;
          CMat zp = Z, zm = Z;
          zp(i, j) += h * dir;
          zm(i, j) -= h * dir;
          const double g = (W(zp) - W(zm)) / (2 * h);
          CHECK(std::abs(g) / scale < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("lambda_empty separates the empty and non-empty graphs") {
  std::mt19937_64 rng(67);
  for (int rep = 0; rep < 5; ++rep) {
    const SpectralStack s = random_stack(rng, 4, 3, 1);
    const TopologicalOrder order = identity_order(4);
    const double ls = lambda_empty(s, order);
    CHECK(ls > 0.0);
    const AdmmConfig cfg = tight();
    const FredomFit above = fredom_fit(s, order, 1.01 * ls, cfg);
    const FredomFit below = fredom_fit(s, order, 0.99 * ls, cfg);
    const FredomFit zero = fredom_fit(s, order, 0.0, cfg);
    CHECK(above.dag.edge_count() == 0);
    CHECK(below.dag.edge_count() > 0);
    CHECK(zero.dag.edge_count() == 6);
    for (const auto* f : {&above, &below, &zero}) check_health(*f, cfg);
  }
}

TEST_CASE("different initializations reach the same objective") {
  std::mt19937_64 rng(71);
  for (int rep = 0; rep < 5; ++rep) {
    const SpectralStack s = random_stack(rng, 4, 4, 2);
    const TopologicalOrder order = identity_order(4);
    const double lam = 0.3 * lambda_empty(s, order);
    const AdmmConfig cfg = tight();
    const FredomFit cold = fredom_fit(s, order, lam, cfg);

    AdmmState other;
    other.rho = cfg.rho;
    for (int n = 0; n < 4; ++n) {
      other.L.L.push_back(random_lower_factor(rng, 4));
      other.U.push_back(CMat::Zero(4, 4));
    }
    other.Z = CMat::Identity(4, 4);
    const FredomFit warm = fredom_fit(s, order, lam, cfg, &other);
    check_health(cold, cfg);
    check_health(warm, cfg);
    CHECK(cold.diagnostics.converged);
    CHECK(warm.diagnostics.converged);
    CHECK(rel_err(warm.diagnostics.objective, cold.diagnostics.objective) < 1e-6);
  }
}

TEST_CASE("fit respects a non-trivial ordering and default tolerances") {
  std::mt19937_64 rng(73);
  const SpectralStack s = random_stack(rng, 5, 6, 3);
  const TopologicalOrder order{{3, 1, 4, 0, 2}, 1.0};
  const AdmmConfig cfg;
  const FredomFit fit = fredom_fit(s, order, 0.2 * lambda_empty(s, order), cfg);
  check_health(fit, cfg);
  // Every edge points forward in the order.
  const Permutation pos = inverse_permutation(order.perm);
  for (const auto& [from, to] : fit.dag.edges()) CHECK(pos[from] < pos[to]);
  CHECK_THROWS_AS(fredom_fit(s, order, -1.0, cfg), InvalidArgument);
}

TEST_CASE("factored row solve matches coordinate sweeps") {
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index k = 1 + rep % 6;
    const CMat A = random_hpd(rng, k, 0.2);
    const CVec z = random_complex(rng, k, 1);
    const CVec uu = random_complex(rng, k, 1);
    const double rho = u(rng);
    const double N = 1.0 + 3.0 * (rep % 3);
    const double diag_rho = (rep % 2) ? rho : 0.0;
    const CVec sweep = update_L_row(A, z, uu, rho, N, diag_rho, nullptr, 1e-14, 20000);
    const CVec exact = RowFactor(A, rho, N, diag_rho).solve(z, uu);
    CHECK((sweep - exact).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(exact(k - 1).imag() == 0.0);
    CHECK(exact(k - 1).real() > 0.0);
  }
  CHECK_THROWS_AS(RowFactor(CMat::Identity(2, 3), 1.0, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(RowFactor(CMat::Identity(2, 2), 0.0, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(RowFactor(CMat::Identity(2, 2), 1.0, 1.0, 0.0).solve(CVec::Zero(3), CVec::Zero(2)),
                  InvalidArgument);
}

TEST_CASE("exact and swept row updates give the same fit") {
  std::mt19937_64 rng(83);
  for (int rep = 0; rep < 3; ++rep) {
    const SpectralStack s = random_stack(rng, 5, 4, 2);
    const TopologicalOrder order = identity_order(5);
    const double lam = 0.25 * lambda_empty(s, order);
    AdmmConfig exact = tight();
    AdmmConfig swept = tight();
    swept.exact_rows = false;
    const FredomFit a = fredom_fit(s, order, lam, exact);
    const FredomFit b = fredom_fit(s, order, lam, swept);
    check_health(a, exact);
    check_health(b, swept);
    CHECK(a.diagnostics.converged);
    CHECK(b.diagnostics.converged);
    CHECK(rel_err(a.diagnostics.objective, b.diagnostics.objective) < 1e-7);
    CHECK((a.state.Z - b.state.Z).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(a.dag.adj == b.dag.adj);
  }
}
