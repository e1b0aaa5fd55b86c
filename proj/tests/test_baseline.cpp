#include <random>

#include "doctest.h"
#include "fredom/baseline.hpp"
#include "fredom/simgen.hpp"
#include "test_util.hpp"

using namespace fredom;

namespace {

RMat gaussian(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p) {
  std::normal_distribution<double> g(0.0, 1.0);
  RMat x(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = g(rng);
  return x;
}

bool respects(const Permutation& perm, const RMat& B) {
  std::vector<int> pos(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) pos[perm[k]] = static_cast<int>(k);
  for (Eigen::Index i = 0; i < B.rows(); ++i)
    for (Eigen::Index j = 0; j < B.cols(); ++j)
      if (B(i, j) != 0.0 && pos[j] >= pos[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("VAR fit on white noise shrinks with T") {
  std::mt19937_64 rng(1);
  double total = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const VarFit f = fit_var(TimeSeriesMatrix::from_real(gaussian(rng, 4000, 3)), 1);
    CHECK(f.residuals.rows() == 3999);
    CHECK_FALSE(f.ridge_used);
    total += f.A[0].norm();
  }
  CHECK(total / 20.0 <= 3.0 * 3.0 / std::sqrt(4000.0));
}

TEST_CASE("VAR fit recovers a nearly noiseless VAR(1)") {
  RMat A(3, 3);
  A << 0.5, 0.2, 0.0, -0.3, 0.6, 0.1, 0.2, 0.0, 0.7;
  std::mt19937_64 rng(2);
  const RMat eps = gaussian(rng, 300, 3);
  RMat x(300, 3);
  x.row(0) = 10.0 * eps.row(0);
  for (int t = 1; t < 300; ++t) x.row(t) = x.row(t - 1) * A.transpose() + 1e-7 * eps.row(t);
  const VarFit f = fit_var(TimeSeriesMatrix::from_real(x), 1);
  CHECK((f.A[0] - A).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("VAR fit edge cases") {
  std::mt19937_64 rng(3);
  const RMat x = gaussian(rng, 50, 3);
  const VarFit f0 = fit_var(TimeSeriesMatrix::from_real(x), 0);
  CHECK(f0.A.empty());
  const RMat centered = x.rowwise() - x.colwise().mean();
  CHECK((f0.residuals - centered).norm() < 1e-12);

  RMat dup = x;
  dup.col(2) = dup.col(1);
  CHECK(fit_var(TimeSeriesMatrix::from_real(dup), 1).ridge_used);

  CHECK_THROWS_AS(fit_var(TimeSeriesMatrix::from_real(gaussian(rng, 9, 3)), 2), InvalidArgument);
  CHECK_THROWS_AS(fit_var(TimeSeriesMatrix::from_complex(CMat::Ones(50, 2)), 1), InvalidArgument);
}

TEST_CASE("EqVar worked examples") {
  const EqVarResult id = eqvar_from_covariance(RMat::Identity(4, 4));
  CHECK(id.order.perm == identity_permutation(4));
  CHECK(id.B0.isZero());

  RMat B = RMat::Zero(3, 3);
  B(1, 0) = 0.8;
  B(2, 1) = 0.8;
  const RMat K = (RMat::Identity(3, 3) - B).inverse();
  const EqVarResult chain = eqvar_from_covariance(K * K.transpose());
  CHECK(chain.order.perm == Permutation{0, 1, 2});
  CHECK((chain.B0 - B).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(eqvar_dag(RMat::Zero(3, 3)), InvalidArgument);
}

TEST_CASE("EqVar recovers every DAG on up to four nodes from population covariances") {
  std::mt19937_64 rng(4);
  int checked = 0;
  for (int p = 2; p <= 4; ++p) {
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        if (i != j) slots.push_back({i, j});
    for (long mask = 0; mask < (1L << slots.size()); ++mask) {
      IMat adj = IMat::Zero(p, p);
      for (std::size_t b = 0; b < slots.size(); ++b)
        if (mask >> b & 1) adj(slots[b].first, slots[b].second) = 1;
      if (!topological_sort(adj)) continue;
      RMat B = RMat::Zero(p, p);
      std::uniform_real_distribution<double> u(0.3, 1.0);
      std::bernoulli_distribution sign(0.5);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          if (adj(i, j)) B(i, j) = sign(rng) ? u(rng) : -u(rng);
      const RMat K = (RMat::Identity(p, p) - B).inverse();
      const EqVarResult r = eqvar_from_covariance(K * K.transpose());
      CHECK(respects(r.order.perm, B));
      CHECK((r.B0 - B).cwiseAbs().maxCoeff() < 1e-8);
      ++checked;
    }
  }
  CHECK(checked == 3 + 25 + 543);
}

TEST_CASE("EqVar is equivariant under relabelling") {
  std::mt19937_64 rng(5);
  RMat B = RMat::Zero(5, 5);
  B(1, 0) = 0.7;
  B(3, 1) = -0.6;
  B(4, 2) = 0.9;
  B(4, 3) = 0.5;
  const RMat x = gaussian(rng, 2000, 5) * (RMat::Identity(5, 5) - B).inverse().transpose();
  const EqVarResult base = eqvar_dag(x);
  const Permutation perm{3, 0, 4, 2, 1};
  RMat xp(x.rows(), 5);
  for (int c = 0; c < 5; ++c) xp.col(c) = x.col(perm[c]);
  const EqVarResult moved = eqvar_dag(xp);
  for (std::size_t k = 0; k < 5; ++k) CHECK(perm[moved.order.perm[k]] == base.order.perm[k]);
  CHECK((permute_symmetric(base.B0, perm) - moved.B0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("TSEqVar composes the two steps") {
  const SvarModel m = make_experiment_a_model(6);
  const GroundTruth gt = generate_svar(m, 5000, 7);
  const TseqvarResult r = tseqvar(gt.series, 1);
  CHECK(r.dag.adj == gt.dag.adj);
  CHECK(r.B.size() == 1);
  const RMat I = RMat::Identity(5, 5);
  CHECK((r.B[0] - (I - r.B0) * r.var.A[0]).norm() < 1e-10);
  CHECK((r.B[0] - m.lags[0]).cwiseAbs().maxCoeff() < 0.1);
  CHECK(r.collapsed.is_acyclic());
  CHECK((r.collapsed.adj.array() >= r.dag.adj.array()).all());

  // Lag order zero is plain EqVar on the demeaned data.
  std::mt19937_64 rng(8);
  const RMat x = gaussian(rng, 500, 4);
  const TseqvarResult z = tseqvar(TimeSeriesMatrix::from_real(x), 0);
  const EqVarResult e = eqvar_dag(x);
  CHECK(z.B0 == e.B0);
  CHECK(z.order.perm == e.order.perm);
  CHECK(z.collapsed.adj == z.dag.adj);
}
