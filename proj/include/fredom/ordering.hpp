#pragma once

#include <optional>
#include <vector>

#include "fredom/spectral.hpp"
#include "fredom/types.hpp"

namespace fredom {

/// One candidate ordering per frequency (rows are permutations of 0..p-1).
struct OrderMatrix {
  std::vector<Permutation> rows;
  /// Optional frequency importance weights, nonnegative and summing to one.
  std::optional<std::vector<double>> weights;
};

struct TopologicalOrder {
  Permutation perm;
  /// (Weighted) fraction of frequencies whose row equals perm.
  double support = 1.0;
};

/// S_jj - S_{j,sel} S_{sel,sel}^+ S_{sel,j}. Pseudo-inverse cutoff 1e-10 * lambda_max.
double conditional_variance(const CMat& s, const std::vector<int>& selected, int j);

/// Greedy minimum-conditional-variance source selection on one Hermitian matrix.
/// Values within 1e-12 relative distance count as ties; the smaller index wins.
Permutation order_from_matrix(const CMat& s);

OrderMatrix order_per_frequency(const SpectralStack& stack);

/// Modal row of theta, weighted when weights are present. Ties go to the
/// candidate that first appears at the lowest frequency index.
TopologicalOrder consensus_order(const OrderMatrix& theta);

}  // namespace fredom
