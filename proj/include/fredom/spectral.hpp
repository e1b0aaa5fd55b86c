#pragma once

#include <cstddef>
#include <vector>

#include "fredom/types.hpp"

namespace fredom {

/// Fourier coefficients d(w_k), w_k = k/T for k = 1..T, scaled by 1/sqrt(T).
/// Row k-1 holds d(w_k); the last row is the zero frequency.
struct FourierStack {
  CMat coeffs;
  bool source_real = true;

  std::size_t length() const { return static_cast<std::size_t>(coeffs.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(coeffs.cols()); }
  /// d(w_k) for 1 <= k <= T.
  CVec at(std::size_t k) const { return coeffs.row(static_cast<Eigen::Index>(k - 1)).transpose(); }
};

/// Locally smoothed periodogram matrices on M equally spaced frequencies.
struct SpectralStack {
  std::vector<CMat> mats;
  std::vector<double> freqs;
  int half_window = 0;
  std::size_t source_length = 0;
  /// Set when m_t < p - 1; window averages may then be singular.
  bool singular_windows = false;

  int window() const { return 2 * half_window + 1; }
  std::size_t blocks() const { return mats.size(); }
  std::size_t dim() const { return mats.empty() ? 0 : static_cast<std::size_t>(mats.front().rows()); }
};

/// d(w_k) = T^{-1/2} sum_{t=1}^T x(t) exp(-2 pi i k t / T).
FourierStack dft(const TimeSeriesMatrix& x);

/// Exact inverse of dft: x(t) = T^{-1/2} sum_k d(w_k) exp(2 pi i k t / T).
CMat inverse_dft(const FourierStack& d);

/// Subtracts the column means.
TimeSeriesMatrix demean(const TimeSeriesMatrix& x);

/// Number of smoothing blocks M = floor((T/2 - m_t - 1) / (2 m_t + 1)).
std::size_t block_count(std::size_t length, int half_window);

/// Raw-grid index (numerator of the frequency) of window position l in block k (k >= 1).
std::size_t window_index(std::size_t block, int offset, int half_window);

/// Averages N = 2 m_t + 1 rank-one periodogram matrices around each block centre
/// ((k-1) N + m_t + 1) / T. Windows stay strictly inside (0, 1/2).
SpectralStack sample_spectral_stack(const FourierStack& d, int half_window);

/// Largest m_t with block_count(T, m_t) >= target_blocks.
int choose_window(std::size_t length, std::size_t target_blocks);

/// demean -> dft -> sample_spectral_stack with m_t chosen for target_blocks.
SpectralStack estimate_spectra(const TimeSeriesMatrix& x, std::size_t target_blocks);

}  // namespace fredom
