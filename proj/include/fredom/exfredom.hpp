#pragma once

#include <vector>

#include "fredom/dag.hpp"
#include "fredom/lbfgs.hpp"
#include "fredom/spectral.hpp"
#include "fredom/types.hpp"

namespace fredom {

/// h(B) = tr(exp(B o conj(B))) - p. Zero exactly when the support of B is acyclic.
double acyclicity(const CMat& B);

/// Wirtinger gradient dh/dB* = exp(B o conj(B))^T o B.
CMat acyclicity_grad(const CMat& B);

/// (1 / (2 n)) sum over the n rows d of ||d - B d||^2. Rows of `block` are DFT vectors.
double block_least_squares(const CMat& B, const CMat& block);

/// Wirtinger gradient of block_least_squares with respect to conj(B).
CMat block_least_squares_grad(const CMat& B, const CMat& block);

/// Exact minimizer over zero-diagonal B of block_least_squares(B, block) + rho2 ||B - C||^2.
CMat solve_block_step(const CMat& block, const CMat& C, double rho2);

/// Per-block DFT rows: the positive-frequency half (1 <= k < T/2) for a real
/// source, every nonzero frequency otherwise, cut into M contiguous equal parts.
std::vector<CMat> split_frequency_blocks(const FourierStack& d, std::size_t M);

struct ExfredomConfig {
  double rho1_init = 1.0;
  double rho1_max = 1e16;
  double rho2 = 1.0;
  double h_tol = 1e-8;
  double consensus_tol = 1e-4;
  double w_thresh = 0.3;
  int max_outer = 100;
  /// ADMM sweeps (a)-(c) per outer iteration.
  int max_inner = 50;
  /// Closed-form block step; otherwise L-BFGS over the real embedding.
  bool exact_block_step = true;
  /// L-BFGS on the smooth part of the Z step before the proximal iterations.
  bool lbfgs_z_warmstart = false;
  LbfgsConfig lbfgs;
};

struct WeightStack {
  std::vector<CMat> B;
  CMat Z;
  std::vector<CMat> U;
};

struct AugLagState {
  double alpha = 0.0;
  double rho1 = 1.0;
  double rho2 = 1.0;
  double h_value = 0.0;
};

struct ExfredomDiagnostics {
  bool converged = false;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double consensus_residual = 0.0;
  /// h(Z) after each outer iteration.
  std::vector<double> h_trace;
  /// Thresholded edges dropped to restore acyclicity.
  int edges_removed = 0;
};

struct ExfredomFit {
  CMat Z;
  SummaryDag dag;
  WeightStack weights;
  AugLagState auglag;
  ExfredomDiagnostics diagnostics;
};

/// Ordering-free summary-DAG learning on DFT blocks.
ExfredomFit exfredom_fit(const FourierStack& d, std::size_t M, double lambda, const ExfredomConfig& cfg = {});

/// Same, on pre-split blocks (rows are DFT vectors).
ExfredomFit exfredom_fit_blocks(const std::vector<CMat>& blocks, double lambda, const ExfredomConfig& cfg = {});

}  // namespace fredom
