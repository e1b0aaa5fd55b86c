#pragma once

#include <functional>

#include "fredom/types.hpp"

namespace fredom {

struct LbfgsConfig {
  int history = 10;
  /// Stop once the largest gradient component falls below this value.
  double grad_tol = 1e-8;
  int max_iter = 500;
  /// Strong Wolfe constants.
  double c1 = 1e-4;
  double c2 = 0.9;
};

struct LbfgsResult {
  RVec x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Returns f(x) and writes the gradient into `grad`.
using SmoothObjective = std::function<double(const RVec& x, RVec& grad)>;

/// Limited-memory BFGS with a strong-Wolfe line search.
LbfgsResult lbfgs_minimize(const SmoothObjective& f, RVec x0, const LbfgsConfig& cfg = {});

}  // namespace fredom
