#include "fredom/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace fredom {
namespace {

constexpr double kPinvCutoff = 1e-10;
constexpr double kTieTolerance = 1e-12;

CMat hermitian_pinv(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(a);
  const RVec& vals = eig.eigenvalues();
  const double lmax = vals.cwiseAbs().maxCoeff();
  RVec inv = RVec::Zero(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (lmax > 0.0 && std::abs(vals(i)) > kPinvCutoff * lmax) inv(i) = 1.0 / vals(i);
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint();
}

CMat principal_submatrix(const CMat& s, const std::vector<int>& idx) {
  const auto q = static_cast<Eigen::Index>(idx.size());
  CMat sub(q, q);
  for (Eigen::Index a = 0; a < q; ++a)
    for (Eigen::Index b = 0; b < q; ++b) sub(a, b) = s(idx[a], idx[b]);
  return sub;
}

// Schur complement of the selected block given a precomputed pseudo-inverse.
double schur_with(const CMat& s, const std::vector<int>& selected, const CMat& sub_pinv, int j) {
  const double sjj = s(j, j).real();
  if (selected.empty()) return sjj;
  CVec cross(static_cast<Eigen::Index>(selected.size()));
  for (Eigen::Index a = 0; a < cross.size(); ++a) cross(a) = s(selected[a], j);
  const double reduction = cross.dot(sub_pinv * cross).real();
  return std::max(0.0, sjj - reduction);
}

}  // namespace

double conditional_variance(const CMat& s, const std::vector<int>& selected, int j) {
  const auto p = static_cast<int>(s.rows());
  if (j < 0 || j >= p) throw InvalidArgument("candidate index out of range");
  for (int v : selected) {
    if (v < 0 || v >= p) throw InvalidArgument("selected index out of range");
    if (v == j) throw InvalidArgument("candidate index already selected");
  }
  if (selected.empty()) return s(j, j).real();
  return schur_with(s, selected, hermitian_pinv(principal_submatrix(s, selected)), j);
}

Permutation order_from_matrix(const CMat& s) {
  const auto p = static_cast<int>(s.rows());
  std::vector<int> selected;
  selected.reserve(p);
  std::vector<bool> used(p, false);
  for (int step = 0; step < p; ++step) {
    const CMat sub_pinv = selected.empty() ? CMat() : hermitian_pinv(principal_submatrix(s, selected));
    int best = -1;
    double best_val = 0.0;
    for (int j = 0; j < p; ++j) {
      if (used[j]) continue;
      const double v = schur_with(s, selected, sub_pinv, j);
      if (best < 0) {
        best = j;
        best_val = v;
        continue;
      }
      const double scale = std::max(std::abs(v), std::abs(best_val));
      if (v < best_val && best_val - v > kTieTolerance * scale) {
        best = j;
        best_val = v;
      }
    }
    used[best] = true;
    selected.push_back(best);
  }
  return selected;
}

OrderMatrix order_per_frequency(const SpectralStack& stack) {
  OrderMatrix theta;
  theta.rows.resize(stack.mats.size());
  for (std::size_t k = 0; k < stack.mats.size(); ++k) theta.rows[k] = order_from_matrix(stack.mats[k]);
  return theta;
}

TopologicalOrder consensus_order(const OrderMatrix& theta) {
  if (theta.rows.empty()) throw InvalidArgument("order matrix has no rows");
  const std::size_t p = theta.rows.front().size();
  for (const auto& r : theta.rows)
    if (!is_permutation(r, p)) throw InvalidArgument("order matrix row is not a permutation");

  std::vector<double> w(theta.rows.size(), 1.0 / static_cast<double>(theta.rows.size()));
  if (theta.weights) {
    if (theta.weights->size() != theta.rows.size())
      throw InvalidArgument("weight count does not match order matrix rows");
    double total = 0.0;
    for (double x : *theta.weights) {
      if (!(x >= 0.0)) throw InvalidArgument("order weights must be nonnegative");
      total += x;
    }
    if (!(total > 0.0)) throw InvalidArgument("order weights sum to zero");
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = (*theta.weights)[k] / total;
  }

  // Accumulate in first-occurrence order so that ties keep the earliest row.
  std::map<Permutation, std::size_t> slot;
  std::vector<Permutation> distinct;
  std::vector<double> mass;
  for (std::size_t k = 0; k < theta.rows.size(); ++k) {
    auto [it, inserted] = slot.try_emplace(theta.rows[k], distinct.size());
    if (inserted) {
      distinct.push_back(theta.rows[k]);
      mass.push_back(0.0);
    }
    mass[it->second] += w[k];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < distinct.size(); ++i)
    if (mass[i] > mass[best] + 1e-12) best = i;
  return {distinct[best], mass[best]};
}

}  // namespace fredom
