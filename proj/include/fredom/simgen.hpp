#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "fredom/dag.hpp"
#include "fredom/ordering.hpp"
#include "fredom/types.hpp"

namespace fredom {

using Rng = std::mt19937_64;

/// Decorrelated per-replicate seed (SplitMix64 of base and index).
std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t index);

/// Frequency-dependent structural coefficients with a fixed support.
struct FrequencyDagModel {
  TopologicalOrder order;
  /// adj(i, j) = 1 for j -> i, original labels.
  IMat support;
  /// B(w) for w in [0, 1); zero outside `support`.
  std::function<CMat(double)> B;

  std::size_t dim() const { return static_cast<std::size_t>(support.rows()); }
};

/// (1/T) (I - B(w))^{-1} (I - B(w))^{-H}.
CMat model_spectrum(const FrequencyDagModel& model, double omega, std::size_t T);

struct GroundTruth {
  TimeSeriesMatrix series;
  SummaryDag dag;
  TopologicalOrder order;
  std::uint64_t seed = 0;
};

/// X(t) = sum_k (I - B(w_k))^{-1} exp(2 pi i w_k t) eps(k), eps(k) ~ N_c(0, I/T).
/// With `real_series`, eps is conjugate-paired (real at k = T/2 and k = T) and
/// the model must satisfy B(1 - w) = conj(B(w)); the output is then real.
GroundTruth generate_transfer_ts(const FrequencyDagModel& model, std::size_t T, std::uint64_t seed,
                                 bool real_series = true);

/// Random lower-triangular support with edge probability s; each edge has
/// B_ij(w) = c1 cos(4 pi w) + 1.2 i c2 sin(2 pi w), c1, c2 ~ U(+-[0.1, 1]).
FrequencyDagModel make_experiment1_model(std::size_t K, double s, std::uint64_t seed);

struct SvarModel {
  RMat B0;
  std::vector<RMat> lags;
  double noise_scale = 1.0;

  std::size_t dim() const { return static_cast<std::size_t>(B0.rows()); }
  /// Reduced-form coefficients (I - B0)^{-1} B_j.
  std::vector<RMat> reduced_form() const;
  /// Spectral radius of the reduced-form companion matrix.
  double spectral_radius() const;
};

/// X(t) = (I - B0)^{-1} (sum_j B_j X(t - j) + eps(t)), eps ~ N(0, noise_scale^2 I),
/// after 500 discarded burn-in steps. Truth is the contemporaneous (B0) DAG.
GroundTruth generate_svar(const SvarModel& model, std::size_t T, std::uint64_t seed);

/// Five-node lag-1 model with the printed B0/B1 supports, noise scale 0.4.
SvarModel make_experiment_a_model(std::uint64_t seed);

/// K nodes in three equal clusters, three lags, block-diagonal coefficients,
/// identity noise covariance.
SvarModel make_experiment_b_model(std::size_t K, std::uint64_t seed);

/// Four-variable nonlinear SVAR; truth 2->1, 1->3, 2->3, 3->4 (1-based labels).
/// `zero_coefficients` sets every b_ij = 0.
GroundTruth generate_nonlinear_svar(std::size_t T, std::uint64_t seed, bool zero_coefficients = false);

/// n iid rows of Y = (I - B)^{-1} eps, eps ~ N_c(0, I), on an Erdos-Renyi DAG
/// with p expected edges; Re and Im of each coefficient ~ U(+-[0.5, 2]).
GroundTruth generate_cscm(std::size_t p, std::size_t n, std::uint64_t seed);

/// Same, for a given coefficient matrix (B(i, j) != 0 means j -> i).
GroundTruth generate_cscm_from(const CMat& B, std::size_t n, std::uint64_t seed);

}  // namespace fredom
