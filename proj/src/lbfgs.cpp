#include "fredom/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace fredom {
namespace {

struct Probe {
  double t;
  double f;
  double dg;  // directional derivative
  RVec g;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), kept inside the
// central part of [a, b]; bisection when the interpolant is unusable.
double cubic_step(const Probe& a, const Probe& b) {
  const double lo = std::min(a.t, b.t), hi = std::max(a.t, b.t);
  const double d1 = a.dg + b.dg - 3.0 * (a.f - b.f) / (a.t - b.t);
  const double rad = d1 * d1 - a.dg * b.dg;
  double t = 0.5 * (lo + hi);
  if (rad >= 0.0) {
    const double d2 = std::copysign(std::sqrt(rad), b.t - a.t);
    const double cand = b.t - (b.t - a.t) * (b.dg + d2 - d1) / (b.dg - a.dg + 2.0 * d2);
    if (std::isfinite(cand)) t = cand;
  }
  const double margin = 0.1 * (hi - lo);
  if (t < lo + margin || t > hi - margin) t = 0.5 * (lo + hi);
  return t;
}

class LineSearch {
 public:
  LineSearch(const SmoothObjective& f, const RVec& x, const RVec& dir, double f0, double dg0, const LbfgsConfig& cfg)
      : f_(f), x_(x), dir_(dir), f0_(f0), dg0_(dg0), cfg_(cfg) {}

  /// Returns false when no acceptable step was found.
  bool run(double t_init, Probe& out) {
    Probe prev{0.0, f0_, dg0_, RVec()};
    double t = t_init;
    for (int i = 0; i < 40; ++i) {
      Probe cur = eval(t);
      if (approx_wolfe(cur)) {
        out = std::move(cur);
        return true;
      }
      if (!std::isfinite(cur.f) || cur.f > f0_ + cfg_.c1 * t * dg0_ || (i > 0 && cur.f >= prev.f))
        return zoom(prev, cur, out);
      if (std::abs(cur.dg) <= -cfg_.c2 * dg0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.dg >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      t *= 2.0;
    }
    return false;
  }

 private:
  // Near the optimum, function differences drown in rounding error; the
  // curvature condition plus a non-increase test up to that noise is then used.
  bool approx_wolfe(const Probe& p) const {
    const double noise = 1e-10 * std::max(1.0, std::abs(f0_));
    return std::isfinite(p.f) && p.f <= f0_ + noise && std::abs(p.dg) <= -cfg_.c2 * dg0_;
  }

  Probe eval(double t) {
    Probe p;
    p.t = t;
    p.g.resize(x_.size());
    p.f = f_(x_ + t * dir_, p.g);
    p.dg = std::isfinite(p.f) ? p.g.dot(dir_) : std::numeric_limits<double>::quiet_NaN();
    return p;
  }

  bool zoom(Probe lo, Probe hi, Probe& out) {
    for (int i = 0; i < 60; ++i) {
      double t;
      if (std::isfinite(hi.f) && std::isfinite(hi.dg))
        t = cubic_step(lo, hi);
      else
        t = 0.5 * (lo.t + hi.t);
      if (std::abs(hi.t - lo.t) < 1e-16 * std::max(1.0, std::abs(lo.t))) break;
      Probe cur = eval(t);
      if (approx_wolfe(cur)) {
        out = std::move(cur);
        return true;
      }
      if (!std::isfinite(cur.f) || cur.f > f0_ + cfg_.c1 * t * dg0_ || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.dg) <= -cfg_.c2 * dg0_) {
          out = std::move(cur);
          return true;
        }
        if (cur.dg * (hi.t - lo.t) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    // Accept the best sufficient-decrease point, if any.
    if (lo.t > 0.0 && lo.g.size() == x_.size()) {
      out = std::move(lo);
      return true;
    }
    return false;
  }

  const SmoothObjective& f_;
  const RVec& x_;
  const RVec& dir_;
  double f0_, dg0_;
  const LbfgsConfig& cfg_;
};

}  // namespace

LbfgsResult lbfgs_minimize(const SmoothObjective& f, RVec x0, const LbfgsConfig& cfg) {
  if (cfg.history < 1 || cfg.max_iter < 0 || !(cfg.c1 > 0.0 && cfg.c1 < cfg.c2 && cfg.c2 < 1.0))
    throw InvalidArgument("invalid L-BFGS configuration");
  LbfgsResult res;
  res.x = std::move(x0);
  RVec g(res.x.size());
  res.value = f(res.x, g);
  if (!std::isfinite(res.value) || !g.allFinite()) throw NumericalError("objective is not finite at the starting point");

  std::deque<RVec> s_hist, y_hist;
  std::deque<double> rho_hist;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    if (g.size() == 0 || g.cwiseAbs().maxCoeff() <= cfg.grad_tol) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    RVec q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    RVec dir = -q;
    double dg = g.dot(dir);
    if (!(dg < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
      dg = -g.squaredNorm();
    }
    const double t0 = s_hist.empty() ? std::min(1.0, 1.0 / g.cwiseAbs().maxCoeff()) : 1.0;
    Probe step;
    LineSearch ls(f, res.x, dir, res.value, dg, cfg);
    if (!ls.run(t0, step)) {
      if (s_hist.empty()) break;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }
    const RVec s = step.t * dir;
    const RVec y = step.g - g;
    res.x += s;
    const double prev = res.value;
    res.value = step.f;
    g = step.g;
    res.iterations = iter + 1;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > cfg.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (std::abs(prev - res.value) <= 1e-16 * std::max(1.0, std::abs(res.value)) &&
        s.cwiseAbs().maxCoeff() <= 1e-16 * std::max(1.0, res.x.cwiseAbs().maxCoeff())) {
      res.converged = g.cwiseAbs().maxCoeff() <= cfg.grad_tol;
      break;
    }
  }
  if (!res.converged && g.size() > 0 && g.cwiseAbs().maxCoeff() <= cfg.grad_tol) res.converged = true;
  return res;
}

}  // namespace fredom
