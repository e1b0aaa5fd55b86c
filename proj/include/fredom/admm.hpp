#pragma once

#include <optional>
#include <vector>

#include "fredom/dag.hpp"
#include "fredom/ordering.hpp"
#include "fredom/spectral.hpp"
#include "fredom/types.hpp"

namespace fredom {

/// Lower-triangular factors with Omega(w_k) = L^H L, one per smoothing block.
struct CholeskyStack {
  std::vector<CMat> L;

  /// Throws InvalidArgument unless every factor is lower triangular with a
  /// real, strictly positive diagonal.
  void validate() const;
};

struct AdmmConfig {
  double rho = 2.0;
  /// Multiply/divide rho by 2 when one residual exceeds the other tenfold.
  bool residual_balancing = false;
  double abs_tol = 1e-6;
  double rel_tol = 1e-4;
  int max_iter = 500;
  /// Coordinate-descent stopping rule of the row subproblem.
  double row_tol = 1e-8;
  int row_max_sweeps = 500;
  /// Solve each row subproblem exactly through a cached factorization
  /// instead of coordinate sweeps.
  bool exact_rows = true;
};

/// Iterates in the permuted (lower-triangular) frame.
struct AdmmState {
  CholeskyStack L;
  CMat Z;
  std::vector<CMat> U;
  double rho = 2.0;
  double lambda = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

struct AdmmDiagnostics {
  bool converged = false;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// Penalized objective at the consensus factor (Z used at every block).
  double objective = 0.0;
  /// Augmented Lagrangian before update (a), after (a) and after (b), per cycle.
  std::vector<double> lagrangian_start;
  std::vector<double> lagrangian_after_l;
  std::vector<double> lagrangian_after_z;
  /// Largest increase of the augmented Lagrangian across the primal updates of
  /// any cycle, relative to max(1, |value|).
  double max_monotonicity_violation = 0.0;
};

struct FredomFit {
  /// Consensus factor in the original labelling.
  CMat Z;
  SummaryDag dag;
  TopologicalOrder order;
  double lambda = 0.0;
  AdmmDiagnostics diagnostics;
  /// Final iterate in the permuted frame; pass back to warm-start another fit.
  AdmmState state;
};

/// sum_k N [tr(S_k L_k^H L_k) - 2 sum_i log L_k(i, i)].
double whittle_negloglik(const CholeskyStack& L, const SpectralStack& stack);

/// Coordinatewise minimizer of
///   N [x^H A x - 2 log x_i] + rho sum_{j<i} |x_j - z_j - u_j|^2 + diag_rho (x_i - Re(z_i + u_i))^2
/// over x in C^{i-1} x R_+. diag_rho = 0 is the uncoupled diagonal of the row
/// subproblem. `start`, when given, seeds the sweeps.
CVec update_L_row(const CMat& A, const CVec& z, const CVec& u, double rho, double N,
                  double diag_rho = 0.0, const CVec* start = nullptr, double tol = 1e-8,
                  int max_sweeps = 500);

/// Complex soft-thresholding a * max(0, 1 - tau / |a|).
cplx soft_threshold(cplx a, double tau);

/// Exact minimizer of the row subproblem solved by update_L_row. The
/// off-diagonal part is affine in the diagonal entry, which then solves a
/// scalar quadratic; the factorization depends only on A, rho, N and diag_rho.
class RowFactor {
 public:
  RowFactor(const CMat& A, double rho, double N, double diag_rho);
  CVec solve(const CVec& z, const CVec& u) const;

 private:
  double rho_, N_, diag_rho_, add_;
  double lead_ = 0.0;
  Eigen::RowVectorXcd adF_;
  CVec b_;
  Eigen::LLT<CMat> llt_;
};

/// Z = S_{lambda/rho}(sum_n (L_n + U_n)) / M off the diagonal; plain average on it.
CMat update_Z(const CholeskyStack& L, const std::vector<CMat>& U, double lambda, double rho);

/// sum_k N [tr(S L^H L) - 2 log det L] + rho sum_k ||L_k - Z + U_k||_F^2
/// + 2 lambda sum_{i != j} |Z_ij|, evaluated on a permuted-frame state.
double augmented_lagrangian(const AdmmState& state, const SpectralStack& permuted_stack);

/// whittle_negloglik with Z at every block plus 2 lambda sum_{i != j} |Z_ij|.
double penalized_objective(const CMat& Z, const SpectralStack& stack, double lambda);

/// Inverse of the Cholesky factor of S: lower triangular L with L^H L = S^{-1}.
CMat inverse_cholesky_factor(const CMat& s);

/// Smallest lambda whose solution has no off-diagonal entries:
/// max_{i>j} |sum_k N D_ii S_k(i, j)| with D_ii = (mean_k S_k(i, i))^{-1/2}.
double lambda_empty(const SpectralStack& stack, const TopologicalOrder& order);

/// The spectral stack with every matrix permuted into `order`.
SpectralStack permute_stack(const SpectralStack& stack, const Permutation& order);

/// Stage 2: ADMM for the consensus-penalized Whittle likelihood.
FredomFit fredom_fit(const SpectralStack& stack, const TopologicalOrder& order, double lambda,
                     const AdmmConfig& cfg = {}, const AdmmState* warm_start = nullptr);

}  // namespace fredom
