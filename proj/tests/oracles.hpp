#pragma once

// Test-only reference routines. They deliberately avoid the library's solvers.

#include <cmath>
#include <functional>

#include "fredom/types.hpp"

namespace fredom::testing {

using RealFn = std::function<double(const RVec&)>;

inline RVec fd_gradient(const RealFn& f, const RVec& x, double h = 1e-6) {
  RVec g(x.size());
  RVec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + step;
    const double fp = f(xp);
    xp(i) = x(i) - step;
    const double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

/// Damped Newton with finite-difference derivatives. `feasible` rejects steps
/// (e.g. a log barrier leaving its domain).
inline RVec fd_newton_minimize(const RealFn& f, RVec x, const std::function<bool(const RVec&)>& feasible,
                               int max_iter = 100) {
  const Eigen::Index n = x.size();
  for (int iter = 0; iter < max_iter; ++iter) {
    const RVec g = fd_gradient(f, x, 1e-5);
    RMat H(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double step = 1e-4 * std::max(1.0, std::abs(x(i)));
      RVec xp = x, xm = x;
      xp(i) += step;
      xm(i) -= step;
      if (!feasible(xm)) xm = x;
      const double denom = (xp(i) - xm(i));
      H.col(i) = (fd_gradient(f, xp, 1e-5) - fd_gradient(f, xm, 1e-5)) / denom;
    }
    H = 0.5 * (H + H.transpose());
    RVec dir = -H.ldlt().solve(g);
    if (!dir.allFinite() || g.dot(dir) >= 0.0) dir = -g;
    double t = 1.0;
    const double f0 = f(x);
    while (t > 1e-12) {
      const RVec cand = x + t * dir;
      if (feasible(cand) && f(cand) <= f0 + 1e-4 * t * g.dot(dir)) break;
      t *= 0.5;
    }
    const RVec next = x + t * dir;
    const double moved = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (moved < 1e-12) break;
  }
  return x;
}

}  // namespace fredom::testing
