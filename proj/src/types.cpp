#include "fredom/types.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace fredom {

TimeSeriesMatrix TimeSeriesMatrix::from_real(const RMat& x,
                                             std::vector<std::string> labels) {
  TimeSeriesMatrix ts;
  ts.data = x.cast<cplx>();
  ts.is_real = true;
  ts.labels = labels.empty() ? default_labels(x.cols()) : std::move(labels);
  ts.validate();
  return ts;
}

TimeSeriesMatrix TimeSeriesMatrix::from_complex(const CMat& x,
                                                std::vector<std::string> labels) {
  TimeSeriesMatrix ts;
  ts.data = x;
  ts.is_real = false;
  ts.labels = labels.empty() ? default_labels(x.cols()) : std::move(labels);
  ts.validate();
  return ts;
}

void TimeSeriesMatrix::validate() const {
  if (data.rows() < 1 || data.cols() < 1)
    throw InvalidArgument("time series must have at least one row and column");
  if (!labels.empty() && labels.size() != dim())
    throw InvalidArgument("label count does not match series dimension");
  for (Eigen::Index t = 0; t < data.rows(); ++t) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      const cplx v = data(t, j);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        std::ostringstream msg;
        msg << "non-finite value at row " << t + 1 << ", column " << j + 1;
        throw InvalidArgument(msg.str());
      }
    }
  }
}

std::vector<std::string> default_labels(std::size_t p) {
  std::vector<std::string> out;
  out.reserve(p);
  for (std::size_t i = 0; i < p; ++i) out.push_back("X" + std::to_string(i + 1));
  return out;
}

bool is_permutation(const Permutation& perm, std::size_t p) {
  if (perm.size() != p) return false;
  std::vector<bool> seen(p, false);
  for (int v : perm) {
    if (v < 0 || static_cast<std::size_t>(v) >= p || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

Permutation identity_permutation(std::size_t p) {
  Permutation perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  return perm;
}

Permutation inverse_permutation(const Permutation& perm) {
  Permutation inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = static_cast<int>(k);
  return inv;
}

}  // namespace fredom
