#pragma once

#include <cmath>
#include <random>

#include "fredom/types.hpp"

namespace fredom::testing {

inline CMat random_complex(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline RMat random_real(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  RMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

/// Well-conditioned Hermitian positive definite matrix.
inline CMat random_hpd(std::mt19937_64& rng, Eigen::Index p, double ridge = 0.5) {
  const CMat g = random_complex(rng, p, p + 2);
  CMat s = g * g.adjoint() / static_cast<double>(p + 2) + ridge * CMat::Identity(p, p);
  return 0.5 * (s + s.adjoint());
}

/// Strictly lower-triangular complex matrix with entries of modulus in [lo, hi].
inline CMat random_strict_lower(std::mt19937_64& rng, Eigen::Index p, double density, double lo = 0.3,
                                double hi = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CMat b = CMat::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (u(rng) < density) b(i, j) = std::polar(lo + (hi - lo) * u(rng), 2.0 * M_PI * u(rng));
  return b;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace fredom::testing
