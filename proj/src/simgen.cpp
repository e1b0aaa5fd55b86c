#include "fredom/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fredom/spectral.hpp"

namespace fredom {
namespace {

constexpr int kBurnIn = 500;

double signed_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  const double v = mag(rng);
  return sign(rng) ? v : -v;
}

SummaryDag dag_from_support(const IMat& adj) {
  SummaryDag g = SummaryDag::empty(static_cast<std::size_t>(adj.rows()));
  g.adj = adj;
  return g;
}

TopologicalOrder order_of(const SummaryDag& g) {
  const auto perm = topological_sort(g.adj);
  if (!perm) throw InvalidArgument("ground-truth graph is cyclic");
  return {*perm, 1.0};
}

IMat support_of(const RMat& m) {
  IMat adj = IMat::Zero(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) adj(i, j) = 1;
  return adj;
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CMat model_spectrum(const FrequencyDagModel& model, double omega, std::size_t T) {
  const Eigen::Index p = static_cast<Eigen::Index>(model.dim());
  const CMat K = (CMat::Identity(p, p) - model.B(omega)).inverse();
  return K * K.adjoint() / static_cast<double>(T);
}

GroundTruth generate_transfer_ts(const FrequencyDagModel& model, std::size_t T, std::uint64_t seed,
                                 bool real_series) {
  if (T < 4 || T % 2 != 0) throw InvalidArgument("transfer-function series need an even length >= 4");
  const Eigen::Index p = static_cast<Eigen::Index>(model.dim());
  if (p < 1 || !model.B) throw InvalidArgument("model has no coefficients");
  Rng rng(seed);
  const double Td = static_cast<double>(T);
  std::normal_distribution<double> real_draw(0.0, 1.0 / std::sqrt(Td));
  std::normal_distribution<double> half_draw(0.0, 1.0 / std::sqrt(2.0 * Td));

  CMat eps(T, p);
  if (real_series) {
    for (std::size_t k = 1; k < T / 2; ++k)
      for (Eigen::Index c = 0; c < p; ++c) {
        const cplx e(half_draw(rng), half_draw(rng));
        eps(k - 1, c) = e;
        eps(T - k - 1, c) = std::conj(e);
      }
    for (Eigen::Index c = 0; c < p; ++c) {
      eps(T / 2 - 1, c) = real_draw(rng);
      eps(T - 1, c) = real_draw(rng);
    }
  } else {
    for (std::size_t k = 0; k < T; ++k)
      for (Eigen::Index c = 0; c < p; ++c) eps(k, c) = cplx(half_draw(rng), half_draw(rng));
  }

  FourierStack d;
  d.source_real = false;
  d.coeffs.resize(T, p);
  const CMat I = CMat::Identity(p, p);
  for (std::size_t k = 1; k <= T; ++k) {
    const double omega = static_cast<double>(k % T) / Td;
    const CMat B = model.B(omega);
    const CVec e = eps.row(k - 1).transpose();
    // Triangular in the model's order, so I - B is never singular.
    const CVec y = (I - B).partialPivLu().solve(e);
    d.coeffs.row(k - 1) = std::sqrt(Td) * y.transpose();
  }
  const CMat x = inverse_dft(d);

  GroundTruth gt;
  if (real_series) {
    const double scale = std::max(1.0, x.real().cwiseAbs().maxCoeff());
    if (x.imag().cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw NumericalError("coefficients are not conjugate-paired; series is not real");
    gt.series = TimeSeriesMatrix::from_real(x.real());
  } else {
    gt.series = TimeSeriesMatrix::from_complex(x);
  }
  gt.dag = dag_from_support(model.support);
  gt.order = model.order;
  gt.seed = seed;
  return gt;
}

FrequencyDagModel make_experiment1_model(std::size_t K, double s, std::uint64_t seed) {
  if (K < 1) throw InvalidArgument("dimension must be positive");
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("edge probability must lie in [0, 1]");
  Rng rng(seed);
  std::bernoulli_distribution edge(s);
  struct Edge {
    Eigen::Index to, from;
    double c1, c2;
  };
  std::vector<Edge> edges;
  const Eigen::Index p = static_cast<Eigen::Index>(K);
  IMat support = IMat::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (edge(rng)) {
        const double c1 = signed_uniform(rng, 0.1, 1.0);
        const double c2 = signed_uniform(rng, 0.1, 1.0);
        edges.push_back({i, j, c1, c2});
        support(i, j) = 1;
      }
  FrequencyDagModel m;
  m.order = {identity_permutation(K), 1.0};
  m.support = support;
  m.B = [edges, p](double w) {
    CMat B = CMat::Zero(p, p);
    for (const auto& e : edges)
      B(e.to, e.from) = cplx(e.c1 * std::cos(4.0 * std::numbers::pi * w), 1.2 * e.c2 * std::sin(2.0 * std::numbers::pi * w));
    return B;
  };
  return m;
}

std::vector<RMat> SvarModel::reduced_form() const {
  const Eigen::Index p = B0.rows();
  const Eigen::PartialPivLU<RMat> lu(RMat::Identity(p, p) - B0);
  std::vector<RMat> A;
  for (const auto& b : lags) A.push_back(lu.solve(b));
  return A;
}

double SvarModel::spectral_radius() const {
  const Eigen::Index p = B0.rows();
  const auto A = reduced_form();
  const Eigen::Index q = static_cast<Eigen::Index>(A.size());
  if (q == 0) return 0.0;
  RMat C = RMat::Zero(p * q, p * q);
  for (Eigen::Index j = 0; j < q; ++j) C.block(0, j * p, p, p) = A[j];
  if (q > 1) C.block(p, 0, p * (q - 1), p * (q - 1)).setIdentity();
  return Eigen::EigenSolver<RMat>(C, false).eigenvalues().cwiseAbs().maxCoeff();
}

GroundTruth generate_svar(const SvarModel& model, std::size_t T, std::uint64_t seed) {
  const Eigen::Index p = model.B0.rows();
  if (p < 1 || model.B0.cols() != p) throw InvalidArgument("B0 must be square");
  for (const auto& b : model.lags)
    if (b.rows() != p || b.cols() != p) throw InvalidArgument("lag matrix dimension mismatch");
  if (!(model.noise_scale > 0.0)) throw InvalidArgument("noise scale must be positive");
  if (!topological_sort(support_of(model.B0))) throw InvalidArgument("B0 support is cyclic");
  const double radius = model.spectral_radius();
  if (!(radius < 1.0)) {
    std::ostringstream msg;
    msg << "nonstationary model: companion spectral radius " << radius;
    throw InvalidArgument(msg.str());
  }

  Rng rng(seed);
  std::normal_distribution<double> g(0.0, model.noise_scale);
  const Eigen::PartialPivLU<RMat> lu(RMat::Identity(p, p) - model.B0);
  const std::size_t q = model.lags.size();
  const std::size_t total = T + kBurnIn;
  RMat x = RMat::Zero(total, p);
  for (std::size_t t = 0; t < total; ++t) {
    RVec rhs(p);
    for (Eigen::Index c = 0; c < p; ++c) rhs(c) = g(rng);
    for (std::size_t j = 1; j <= q && j <= t; ++j) rhs += model.lags[j - 1] * x.row(t - j).transpose();
    x.row(t) = lu.solve(rhs).transpose();
  }
  GroundTruth gt;
  gt.series = TimeSeriesMatrix::from_real(x.bottomRows(T));
  gt.dag = dag_from_support(support_of(model.B0));
  gt.order = order_of(gt.dag);
  gt.seed = seed;
  return gt;
}

SvarModel make_experiment_a_model(std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::pair<int, int>> b0{{0, 1}, {3, 2}, {4, 3}};
  const std::vector<std::pair<int, int>> b1{{0, 1}, {0, 2}, {1, 2}, {3, 0}, {4, 3}};
  for (;;) {
    SvarModel m;
    m.noise_scale = 0.4;
    m.B0 = RMat::Zero(5, 5);
    RMat B1 = RMat::Zero(5, 5);
    for (auto [i, j] : b0) m.B0(i, j) = signed_uniform(rng, 0.3, 0.8);
    for (auto [i, j] : b1) B1(i, j) = signed_uniform(rng, 0.2, 0.5);
    m.lags = {B1};
    if (m.spectral_radius() < 1.0) return m;
  }
}

SvarModel make_experiment_b_model(std::size_t K, std::uint64_t seed) {
  if (K < 3 || K % 3 != 0) throw InvalidArgument("Experiment B needs a multiple of three nodes");
  Rng rng(seed);
  std::bernoulli_distribution edge(0.5);
  const Eigen::Index p = static_cast<Eigen::Index>(K);
  const Eigen::Index c = p / 3;
  for (;;) {
    SvarModel m;
    m.noise_scale = 1.0;
    m.B0 = RMat::Zero(p, p);
    m.lags.assign(3, RMat::Zero(p, p));
    for (Eigen::Index b = 0; b < 3; ++b) {
      const Eigen::Index off = b * c;
      for (Eigen::Index i = 0; i < c; ++i)
        for (Eigen::Index j = 0; j < c; ++j) {
          if (j < i && edge(rng)) m.B0(off + i, off + j) = signed_uniform(rng, 0.3, 0.8);
          for (std::size_t l = 0; l < 3; ++l)
            if (edge(rng)) m.lags[l](off + i, off + j) = signed_uniform(rng, 0.1, 0.3) / static_cast<double>(l + 1);
        }
    }
    if (m.spectral_radius() < 1.0) return m;
  }
}

GroundTruth generate_nonlinear_svar(std::size_t T, std::uint64_t seed, bool zero_coefficients) {
  if (T < 1) throw InvalidArgument("length must be positive");
  Rng rng(seed);
  auto coef = [&] { return zero_coefficients ? 0.0 : signed_uniform(rng, 0.1, 0.4); };
  const double b11 = coef(), b12 = coef(), b13 = coef(), b22 = coef(), b31 = coef(), b32 = coef(), b33 = coef(),
               b41 = coef(), b42 = coef();
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t total = T + kBurnIn;
  RMat x = RMat::Zero(total, 4);
  RVec prev = RVec::Zero(4);
  for (std::size_t t = 0; t < total; ++t) {
    RVec u(4);
    for (int c = 0; c < 4; ++c) u(c) = g(rng);
    const double x2 = b22 * prev(1) + u(1);
    const double x1 = b11 * x2 * x2 + b12 * prev(0) + b13 * prev(1) * prev(1) + u(0);
    const double x3 = b31 * x1 * x1 * x1 + b32 * prev(1) * prev(1) + b33 * prev(2) + u(2);
    const double x4 = std::exp(std::clamp(b41 * x3, -10.0, 10.0)) + b42 * prev(3) + u(3);
    x.row(t) << x1, x2, x3, x4;
    prev = x.row(t).transpose();
  }
  IMat adj = IMat::Zero(4, 4);
  adj(0, 1) = 1;  // 2 -> 1
  adj(2, 0) = 1;  // 1 -> 3
  adj(2, 1) = 1;  // 2 -> 3
  adj(3, 2) = 1;  // 3 -> 4
  GroundTruth gt;
  gt.series = TimeSeriesMatrix::from_real(x.bottomRows(T));
  gt.dag = dag_from_support(adj);
  gt.order = order_of(gt.dag);
  gt.seed = seed;
  return gt;
}

GroundTruth generate_cscm(std::size_t p, std::size_t n, std::uint64_t seed) {
  if (p < 2) throw InvalidArgument("cSCM needs p >= 2");
  Rng rng(seed);
  Permutation perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::bernoulli_distribution edge(std::min(1.0, 2.0 / static_cast<double>(p - 1)));
  CMat B = CMat::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a + 1; b < p; ++b)
      if (edge(rng)) B(perm[b], perm[a]) = cplx(signed_uniform(rng, 0.5, 2.0), signed_uniform(rng, 0.5, 2.0));
  return generate_cscm_from(B, n, replicate_seed(seed, 1));
}

GroundTruth generate_cscm_from(const CMat& B, std::size_t n, std::uint64_t seed) {
  const Eigen::Index p = B.rows();
  if (p < 1 || B.cols() != p || n < 1) throw InvalidArgument("invalid cSCM specification");
  GroundTruth gt;
  gt.dag = SummaryDag::from_support(B);
  gt.order = order_of(gt.dag);
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  CMat eps(static_cast<Eigen::Index>(n), p);
  for (Eigen::Index r = 0; r < eps.rows(); ++r)
    for (Eigen::Index c = 0; c < p; ++c) eps(r, c) = cplx(g(rng), g(rng));
  const CMat K = (CMat::Identity(p, p) - B).inverse();
  gt.series = TimeSeriesMatrix::from_complex(eps * K.transpose());
  gt.seed = seed;
  gt.dag.weights = B;
  return gt;
}

}  // namespace fredom
