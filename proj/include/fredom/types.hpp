#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fredom {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using IMat = Eigen::MatrixXi;

/// Thrown for precondition violations and malformed inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine cannot produce a usable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// T x p observations. Real series are stored with zero imaginary parts.
struct TimeSeriesMatrix {
  CMat data;
  bool is_real = true;
  std::vector<std::string> labels;

  std::size_t length() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(data.cols()); }

  static TimeSeriesMatrix from_real(const RMat& x,
                                    std::vector<std::string> labels = {});
  static TimeSeriesMatrix from_complex(const CMat& x,
                                       std::vector<std::string> labels = {});

  /// Throws InvalidArgument on empty data, label mismatch or non-finite entries.
  void validate() const;
};

/// Default labels X1..Xp.
std::vector<std::string> default_labels(std::size_t p);

/// A permutation of 0..p-1; perm[k] is the original index placed at position k.
using Permutation = std::vector<int>;

bool is_permutation(const Permutation& perm, std::size_t p);
Permutation identity_permutation(std::size_t p);
Permutation inverse_permutation(const Permutation& perm);

/// Returns P * A * P^T, i.e. out(a, b) = A(perm[a], perm[b]).
template <typename Derived>
typename Derived::PlainObject permute_symmetric(
    const Eigen::MatrixBase<Derived>& a, const Permutation& perm) {
  typename Derived::PlainObject out(a.rows(), a.cols());
  const auto n = static_cast<Eigen::Index>(perm.size());
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) out(r, c) = a(perm[r], perm[c]);
  return out;
}

/// Inverse of permute_symmetric: out(perm[a], perm[b]) = A(a, b).
template <typename Derived>
typename Derived::PlainObject unpermute_symmetric(
    const Eigen::MatrixBase<Derived>& a, const Permutation& perm) {
  typename Derived::PlainObject out(a.rows(), a.cols());
  const auto n = static_cast<Eigen::Index>(perm.size());
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) out(perm[r], perm[c]) = a(r, c);
  return out;
}

}  // namespace fredom
