#include <deque>
#include <functional>
#include <map>
#include <random>

#include "doctest.h"
#include "fredom/metrics.hpp"
#include "graph_oracles.hpp"
#include "test_util.hpp"

using namespace fredom;
using namespace fredom::testing;

namespace {

SummaryDag graph(int p, const std::vector<std::pair<int, int>>& edges) {
  SummaryDag g = SummaryDag::empty(p);
  for (auto [from, to] : edges) g.adj(to, from) = 1;
  return g;
}

// Population linear-Gaussian check: adjusting for Z must recover the total effect.
int sid_regression_oracle(const SummaryDag& est, const SummaryDag& truth, std::mt19937_64& rng) {
  const int p = static_cast<int>(truth.dim());
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::bernoulli_distribution sign(0.5);
  RMat B = RMat::Zero(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (truth.adj(i, j)) B(i, j) = sign(rng) ? u(rng) : -u(rng);
  const RMat K = (RMat::Identity(p, p) - B).inverse();
  const RMat S = K * K.transpose();
  int errors = 0;
  for (int i = 0; i < p; ++i) {
    const auto pa = est.parents(i);
    for (int j = 0; j < p; ++j) {
      if (j == i) continue;
      double predicted = 0.0;
      if (std::find(pa.begin(), pa.end(), j) == pa.end()) {
        std::vector<int> set{i};
        set.insert(set.end(), pa.begin(), pa.end());
        const int n = static_cast<int>(set.size());
        RMat A(n, n);
        RVec c(n);
        for (int a = 0; a < n; ++a) {
          c(a) = S(set[a], j);
          for (int b = 0; b < n; ++b) A(a, b) = S(set[a], set[b]);
        }
        predicted = A.ldlt().solve(c)(0);
      }
      if (std::abs(predicted - K(j, i)) > 1e-8) ++errors;
    }
  }
  return errors;
}

}  // namespace

TEST_CASE("shd worked examples") {
  const SummaryDag a = graph(3, {{0, 1}, {1, 2}});
  CHECK(shd(a, a) == 0);
  CHECK(shd(graph(2, {{1, 0}}), graph(2, {{0, 1}})) == 1);
  CHECK(shd(graph(3, {{0, 1}, {0, 2}}), a) == 2);
  CHECK_THROWS_AS(shd(graph(2, {}), graph(3, {})), InvalidArgument);
}

TEST_CASE("shd equals the minimal edit count on all 3-node DAG pairs") {
  const auto dags = all_dags(3);
  CHECK(dags.size() == 25);
  for (const auto& x : dags)
    for (const auto& y : dags) {
      CHECK(shd(x, y) == shd_oracle(x.adj, y.adj));
      CHECK(shd(x, y) == shd(y, x));
    }
}

TEST_CASE("sid worked examples") {
  const SummaryDag chain = graph(3, {{0, 1}, {1, 2}});
  CHECK(sid(chain, chain) == 0);
  CHECK(sid(graph(2, {}), graph(2, {{0, 1}})) == 1);
  for (const auto& est : all_dags(3)) CHECK(sid(est, graph(3, {})) == 0);
  SummaryDag cyc = graph(3, {{0, 1}, {1, 2}, {2, 0}});
  CHECK_THROWS_AS(sid(cyc, chain), InvalidArgument);
}

TEST_CASE("sid matches the path-enumeration oracle") {
  const auto dags = all_dags(3);
  std::mt19937_64 rng(19);
  for (const auto& truth : dags) {
    const SidOracle oracle{truth.adj, 3};
    for (const auto& est : dags) {
      const int s = sid(est, truth);
      CHECK(s == oracle.sid(est));
      CHECK(s == sid_regression_oracle(est, truth, rng));
      CHECK(s <= 6);
    }
  }
  for (int rep = 0; rep < 200; ++rep) {
    const SummaryDag truth = random_dag(rng, 5, 0.5);
    const SummaryDag est = random_dag(rng, 5, 0.5);
    const SidOracle oracle{truth.adj, 5};
    const int s = sid(est, truth);
    CHECK(s == oracle.sid(est));
    CHECK(s == sid_regression_oracle(est, truth, rng));
    CHECK(sid(truth, truth) == 0);
  }
}

TEST_CASE("d-separation basics") {
  const IMat collider = graph(3, {{0, 2}, {1, 2}}).adj;
  CHECK(d_separated(collider, 0, 1, {}));
  CHECK_FALSE(d_separated(collider, 0, 1, {2}));
  const IMat chain = graph(3, {{0, 1}, {1, 2}}).adj;
  CHECK_FALSE(d_separated(chain, 0, 2, {}));
  CHECK(d_separated(chain, 0, 2, {1}));
}

TEST_CASE("ebic score") {
  CHECK(ebic_score(10.0, 3, 5, 7.0, 4, 0.0) == doctest::Approx(20.0 + 3.0 * std::log(28.0)));
  CHECK(ebic_score(10.0, 3, 5, 7.0, 4, 0.5) == doctest::Approx(20.0 + 3.0 * std::log(28.0) + 3.0 * std::log(10.0)));
}

TEST_CASE("ebic path on white-noise spectra picks the empty graph") {
  SpectralStack s;
  s.half_window = 2;
  s.mats.assign(4, 2.0 * CMat::Identity(4, 4));
  const LambdaPath path = ebic_path(s, {identity_permutation(4), 1.0});
  CHECK(path.grid.size() == 20);
  CHECK(path.edges[path.chosen] == 0);
  for (std::size_t g = 1; g < path.grid.size(); ++g) CHECK(path.grid[g] < path.grid[g - 1]);
}

TEST_CASE("ebic path on exact chain spectra selects the true support") {
  CMat B = CMat::Zero(3, 3);
  B(1, 0) = cplx(0.9, 0.4);
  B(2, 1) = cplx(-0.6, 0.8);
  SpectralStack s;
  s.half_window = 3;
  for (int k = 0; k < 4; ++k) {
    CMat Bk = B;
    Bk(1, 0) *= std::polar(1.0, 0.3 * k);
    const CMat K = (CMat::Identity(3, 3) - Bk).inverse();
    s.mats.push_back(100.0 * K * K.adjoint());
  }
  const TopologicalOrder order{identity_permutation(3), 1.0};
  AdmmConfig cfg;
  cfg.abs_tol = 1e-9;
  cfg.rel_tol = 1e-9;
  cfg.max_iter = 5000;
  const LambdaPath path = ebic_path(s, order, 20, 0.5, cfg);
  CHECK(path.grid.front() == doctest::Approx(path.lambda_star / 2));
  CHECK(path.grid.back() == doctest::Approx(path.lambda_star / 200));
  const SummaryDag chosen = path.fits[path.chosen].dag;

  // Oracle: unpenalized constrained Whittle MLE for each of the 8 supports.
  const double N = s.window();
  const double M = double(s.blocks());
  CMat Sbar = CMat::Zero(3, 3);
  for (const auto& m : s.mats) Sbar += m / M;
  const std::vector<std::pair<int, int>> slots{{1, 0}, {2, 0}, {2, 1}};
  double best = 1e300;
  int best_mask = -1;
  for (int mask = 0; mask < 8; ++mask) {
    CMat L = CMat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
      std::vector<int> pa;
      for (int b = 0; b < 3; ++b)
        if ((mask >> b & 1) && slots[b].first == i) pa.push_back(slots[b].second);
      // Row i of L: regress i on its allowed parents under the conjugate moments.
      const CMat A = Sbar.transpose();
      const int n = static_cast<int>(pa.size());
      CMat App(n, n);
      CVec api(n);
      for (int a = 0; a < n; ++a) {
        api(a) = A(pa[a], i);
        for (int b = 0; b < n; ++b) App(a, b) = A(pa[a], pa[b]);
      }
      const CVec beta = n ? CVec(App.inverse() * api) : CVec();
      const double schur = (A(i, i) - (n ? (api.adjoint() * beta)(0, 0) : cplx(0))).real();
      const double lii = 1.0 / std::sqrt(schur);
      L(i, i) = lii;
      for (int a = 0; a < n; ++a) L(i, pa[a]) = -lii * beta(a);
    }
    double w = 0.0;
    for (const auto& m : s.mats) {
      const CMat omega = L.adjoint() * L;
      w += N * ((m * omega).trace().real() - std::log(omega.determinant().real()));
    }
    const int e = __builtin_popcount(mask);
    const double score = 2 * w + e * std::log(N * M) + 2 * 0.5 * e * std::log(3.0);
    if (score < best) {
      best = score;
      best_mask = mask;
    }
  }
  CHECK(best_mask == 0b101);
  CHECK(chosen.edge_count() == 2);
  CHECK(chosen.has_edge(0, 1));
  CHECK(chosen.has_edge(1, 2));

  // Warm-started path against cold starts.
  for (std::size_t g = 0; g < path.grid.size(); g += 4) {
    const FredomFit cold = fredom_fit(s, order, path.grid[g], cfg);
    CHECK(cold.dag.adj == path.fits[g].dag.adj);
    CHECK(rel_err(cold.diagnostics.objective, path.fits[g].diagnostics.objective) < 1e-6);
    CHECK(path.fits[g].diagnostics.max_monotonicity_violation <= 1e-8);
  }
}
