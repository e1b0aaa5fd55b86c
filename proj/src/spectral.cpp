#include "fredom/spectral.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

namespace fredom {
namespace {

// FFTW planning is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Unnormalized transform of one column in place. sign = FFTW_FORWARD or FFTW_BACKWARD.
void fft_columns(CMat& a, int sign) {
  const int n = static_cast<int>(a.rows());
  std::vector<cplx> buf(static_cast<std::size_t>(n));
  auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(n, ptr, ptr, sign, FFTW_ESTIMATE);
  }
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (int t = 0; t < n; ++t) buf[t] = a(t, j);
    fftw_execute_dft(plan, ptr, ptr);
    for (int t = 0; t < n; ++t) a(t, j) = buf[t];
  }
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

FourierStack dft(const TimeSeriesMatrix& x) {
  x.validate();
  const auto T = static_cast<Eigen::Index>(x.length());
  // FFTW indexes time from 0; the t = 1..T convention adds a phase exp(-2 pi i k / T).
  CMat work = x.data;
  fft_columns(work, FFTW_FORWARD);
  FourierStack out;
  out.source_real = x.is_real;
  out.coeffs.resize(T, work.cols());
  const double scale = 1.0 / std::sqrt(static_cast<double>(T));
  for (Eigen::Index k = 1; k <= T; ++k) {
    const Eigen::Index bin = k % T;
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(T);
    const cplx phase = std::polar(scale, angle);
    out.coeffs.row(k - 1) = work.row(bin) * phase;
  }
  return out;
}

CMat inverse_dft(const FourierStack& d) {
  const auto T = static_cast<Eigen::Index>(d.length());
  CMat work(T, d.coeffs.cols());
  for (Eigen::Index k = 1; k <= T; ++k) work.row(k % T) = d.coeffs.row(k - 1);
  fft_columns(work, FFTW_BACKWARD);
  // work(n) = sum_k d_k exp(2 pi i k n / T) for n = t mod T.
  CMat x(T, d.coeffs.cols());
  const double scale = 1.0 / std::sqrt(static_cast<double>(T));
  for (Eigen::Index t = 1; t <= T; ++t) x.row(t - 1) = work.row(t % T) * scale;
  return x;
}

TimeSeriesMatrix demean(const TimeSeriesMatrix& x) {
  TimeSeriesMatrix out = x;
  const CVec mean = x.data.colwise().mean().transpose();
  out.data.rowwise() -= mean.transpose();
  if (x.is_real) out.data = out.data.real().cast<cplx>();
  return out;
}

std::size_t block_count(std::size_t length, int half_window) {
  if (half_window < 0) return 0;
  const double n = 2.0 * half_window + 1.0;
  const double num = static_cast<double>(length) / 2.0 - half_window - 1.0;
  if (num < n) return 0;
  return static_cast<std::size_t>(std::floor(num / n));
}

std::size_t window_index(std::size_t block, int offset, int half_window) {
  const auto n = static_cast<long>(2 * half_window + 1);
  const long idx = (static_cast<long>(block) - 1) * n + half_window + 1 + offset;
  return static_cast<std::size_t>(idx);
}

SpectralStack sample_spectral_stack(const FourierStack& d, int half_window) {
  if (half_window < 0) throw InvalidArgument("half-window must be nonnegative");
  const std::size_t T = d.length();
  const std::size_t M = block_count(T, half_window);
  if (M < 2) {
    throw InvalidArgument("half-window " + std::to_string(half_window) +
                          " is too large for series length " + std::to_string(T) +
                          " (fewer than two smoothing blocks)");
  }
  const auto p = static_cast<Eigen::Index>(d.dim());
  const int N = 2 * half_window + 1;

  SpectralStack out;
  out.half_window = half_window;
  out.source_length = T;
  out.singular_windows = half_window < p - 1;
  out.mats.resize(M);
  out.freqs.resize(M);
  for (std::size_t k = 1; k <= M; ++k) {
    CMat s = CMat::Zero(p, p);
    for (int l = -half_window; l <= half_window; ++l) {
      const CVec v = d.at(window_index(k, l, half_window));
      s.noalias() += v * v.adjoint();
    }
    s /= static_cast<double>(N);
    // Exact Hermitian symmetry regardless of summation rounding.
    out.mats[k - 1] = 0.5 * (s + s.adjoint());
    out.freqs[k - 1] =
        static_cast<double>(window_index(k, 0, half_window)) / static_cast<double>(T);
  }
  return out;
}

int choose_window(std::size_t length, std::size_t target_blocks) {
  if (target_blocks < 1 || length < 4 * target_blocks) {
    throw InvalidArgument("cannot fit " + std::to_string(target_blocks) +
                          " smoothing blocks into a series of length " + std::to_string(length));
  }
  int best = -1;
  for (int m = 0; block_count(length, m) >= target_blocks; ++m) best = m;
  if (best < 0) {
    throw InvalidArgument("cannot fit " + std::to_string(target_blocks) +
                          " smoothing blocks into a series of length " + std::to_string(length));
  }
  return best;
}

SpectralStack estimate_spectra(const TimeSeriesMatrix& x, std::size_t target_blocks) {
  return sample_spectral_stack(dft(demean(x)), choose_window(x.length(), target_blocks));
}

}  // namespace fredom
