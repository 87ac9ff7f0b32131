#pragma once

// Dense BFGS with a strong-Wolfe line search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maxland/error.hpp"
#include "maxland/random.hpp"

namespace maxland {

struct BfgsConfig {
  double grad_tol = 1e-8;  ///< infinity-norm stopping threshold
  std::size_t max_iters = 2000;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  std::size_t max_line_search_steps = 50;
  bool secant_refine = true;  ///< one secant step toward the exact line minimum

  void validate() const {
    if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
      throw Error("BFGS config requires 0 < c1 < c2 < 1");
    }
    if (!(grad_tol > 0.0)) throw Error("BFGS config requires grad_tol > 0");
    if (max_line_search_steps < 1) throw Error("BFGS config requires at least one line-search step");
  }
};

enum class Termination { kConverged, kMaxIters, kLineSearchFailure };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::kConverged: return "converged";
    case Termination::kMaxIters: return "max-iters";
    case Termination::kLineSearchFailure: return "line-search-failure";
  }
  return "unknown";
}

struct OptResult {
  std::vector<double> theta;
  double value = 0.0;
  std::size_t iterations = 0;
  double grad_norm = 0.0;  ///< infinity norm at theta
  Termination termination = Termination::kMaxIters;
  std::size_t evaluations = 0;
  std::vector<double> accepted_values;  ///< objective after start and every accepted step
};

/// f(x, grad) -> value; must fill grad.
using ObjectiveFn = std::function<double(std::span<const double>, std::span<double>)>;

namespace detail {

struct LinePoint {
  double alpha = 0.0;
  double f = 0.0;
  double d = 0.0;  // directional derivative
  Eigen::VectorXd g;
};

class LineSearch {
 public:
  LineSearch(const ObjectiveFn& fn, const BfgsConfig& cfg, std::size_t& evals)
      : fn_(fn), cfg_(cfg), evals_(evals) {}

  /// Strong-Wolfe search along p from x. Returns false if no acceptable
  /// point was found; `best` then holds the lowest point satisfying the
  /// sufficient-decrease condition, if any (alpha > 0).
  bool run(const Eigen::VectorXd& x, const Eigen::VectorXd& p, double f0, double d0, LinePoint& out,
           LinePoint& best) {
    x_ = &x;
    p_ = &p;
    f0_ = f0;
    d0_ = d0;
    steps_ = 0;
    best = LinePoint{};
    best.f = f0;
    LinePoint prev{0.0, f0, d0, {}};
    double alpha = 1.0;
    for (bool first = true;; first = false) {
      if (steps_ >= cfg_.max_line_search_steps) return false;
      LinePoint cur = eval(alpha, best);
      if (cur.f > f0_ + cfg_.wolfe_c1 * alpha * d0_ || (!first && cur.f >= prev.f)) {
        return zoom(prev, cur, out, best);
      }
      if (std::abs(cur.d) <= -cfg_.wolfe_c2 * d0_) {
        out = std::move(cur);
        refine(out, best);
        return true;
      }
      if (cur.d >= 0.0) return zoom(cur, prev, out, best);
      prev = std::move(cur);
      alpha *= 2.0;
    }
  }

 private:
  LinePoint eval(double alpha, LinePoint& best) {
    ++steps_;
    ++evals_;
    LinePoint pt;
    pt.alpha = alpha;
    const Eigen::VectorXd xn = *x_ + alpha * *p_;
    pt.g.resize(xn.size());
    pt.f = fn_(std::span<const double>(xn.data(), static_cast<std::size_t>(xn.size())),
               std::span<double>(pt.g.data(), static_cast<std::size_t>(pt.g.size())));
    if (!std::isfinite(pt.f) || !pt.g.allFinite()) throw Error("objective returned a non-finite value");
    pt.d = pt.g.dot(*p_);
    if (pt.f <= f0_ + cfg_.wolfe_c1 * alpha * d0_ && pt.f < best.f) best = pt;
    return pt;
  }

  bool zoom(LinePoint lo, LinePoint hi, LinePoint& out, LinePoint& best) {
    while (steps_ < cfg_.max_line_search_steps) {
      const double a = lo.alpha;
      const double b = hi.alpha;
      const double width = b - a;
      if (std::abs(width) <= 1e-16 * std::max(1.0, std::abs(a))) return false;
      double alpha = cubic_min(lo, hi);
      const double lo_b = std::min(a, b) + 0.1 * std::abs(width);
      const double hi_b = std::max(a, b) - 0.1 * std::abs(width);
      if (!std::isfinite(alpha) || alpha < lo_b || alpha > hi_b) alpha = 0.5 * (a + b);
      LinePoint cur = eval(alpha, best);
      if (cur.f > f0_ + cfg_.wolfe_c1 * alpha * d0_ || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.d) <= -cfg_.wolfe_c2 * d0_) {
          out = std::move(cur);
          refine(out, best);
          return true;
        }
        if (cur.d * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    return false;
  }

  /// Replaces an accepted point by the secant minimizer of the slope through
  /// (0, d0) and (alpha, d) when that point is lower and still strong-Wolfe.
  /// Exact on quadratics, which gives finite termination there.
  void refine(LinePoint& out, LinePoint& best) {
    if (!cfg_.secant_refine || steps_ >= cfg_.max_line_search_steps) return;
    if (std::abs(out.d) <= 1e-10 * std::abs(d0_) || !(out.d > d0_)) return;
    const double alpha = out.alpha * d0_ / (d0_ - out.d);
    if (!(alpha > 0.0) || std::abs(alpha - out.alpha) <= 1e-12 * out.alpha) return;
    LinePoint cur = eval(alpha, best);
    if (cur.f <= out.f && cur.f <= f0_ + cfg_.wolfe_c1 * alpha * d0_ && std::abs(cur.d) <= -cfg_.wolfe_c2 * d0_) {
      out = std::move(cur);
    }
  }

  /// Minimizer of the cubic interpolating value and slope at both ends.
  static double cubic_min(const LinePoint& u, const LinePoint& v) {
    const double d1 = u.d + v.d - 3.0 * (u.f - v.f) / (u.alpha - v.alpha);
    const double disc = d1 * d1 - u.d * v.d;
    if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double sgn = v.alpha >= u.alpha ? 1.0 : -1.0;
    const double d2 = sgn * std::sqrt(disc);
    const double denom = v.d - u.d + 2.0 * d2;
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return v.alpha - (v.alpha - u.alpha) * (v.d + d2 - d1) / denom;
  }

  const ObjectiveFn& fn_;
  const BfgsConfig& cfg_;
  std::size_t& evals_;
  const Eigen::VectorXd* x_ = nullptr;
  const Eigen::VectorXd* p_ = nullptr;
  double f0_ = 0.0;
  double d0_ = 0.0;
  std::size_t steps_ = 0;
};

}  // namespace detail

/// Minimizes `fn` from `theta0`. Accepted steps satisfy sufficient decrease,
/// so the objective never increases. The inverse-Hessian update is skipped
/// when y's <= 1e-12 |y||s|. A failed line search first retries along the
/// steepest-descent direction with the inverse Hessian reset.
inline OptResult minimize(const ObjectiveFn& fn, std::span<const double> theta0, const BfgsConfig& cfg = {}) {
  cfg.validate();
  const auto m = static_cast<Eigen::Index>(theta0.size());
  if (m == 0) throw Error("minimize: empty parameter vector");
  OptResult res;
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(theta0.data(), m);
  Eigen::VectorXd g(m);
  double f = fn(std::span<const double>(x.data(), theta0.size()), std::span<double>(g.data(), theta0.size()));
  res.evaluations = 1;
  if (!std::isfinite(f) || !g.allFinite()) throw Error("objective returned a non-finite value");
  res.accepted_values.push_back(f);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(m, m);
  bool scaled = false;
  detail::LineSearch ls(fn, cfg, res.evaluations);
  res.termination = Termination::kMaxIters;
  std::size_t it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
      res.termination = Termination::kConverged;
      break;
    }
    Eigen::VectorXd p = -hinv * g;
    double d0 = g.dot(p);
    if (!(d0 < 0.0)) {
      hinv.setIdentity();
      scaled = false;
      p = -g;
      d0 = g.dot(p);
    }
    detail::LinePoint next, best;
    bool ok = ls.run(x, p, f, d0, next, best);
    if (!ok && best.alpha > 0.0) {
      next = best;
      ok = true;
    }
    if (!ok && scaled) {
      hinv.setIdentity();
      scaled = false;
      p = -g;
      d0 = g.dot(p);
      ok = ls.run(x, p, f, d0, next, best);
      if (!ok && best.alpha > 0.0) {
        next = best;
        ok = true;
      }
    }
    if (!ok) {
      res.termination = Termination::kLineSearchFailure;
      break;
    }
    const Eigen::VectorXd s = next.alpha * p;
    const Eigen::VectorXd y = next.g - g;
    x += s;
    f = next.f;
    g = next.g;
    res.accepted_values.push_back(f);
    const double ys = y.dot(s);
    if (ys > 1e-12 * y.norm() * s.norm()) {
      if (!scaled) {
        hinv *= ys / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / ys;
      const Eigen::VectorXd hy = hinv * y;
      const double yhy = y.dot(hy);
      // H+ = H - rho (s hy' + hy s') + (rho^2 y'Hy + rho) s s'
      hinv.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
      hinv.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
    }
  }
  if (it == cfg.max_iters && g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) res.termination = Termination::kConverged;
  res.iterations = it;
  res.theta.assign(x.data(), x.data() + m);
  res.value = f;
  res.grad_norm = g.lpNorm<Eigen::Infinity>();
  return res;
}

/// I.i.d. uniform angles in [0, 2 pi).
inline std::vector<double> random_init(std::size_t m, std::uint64_t seed) {
  if (m == 0) throw Error("random_init: parameter count must be >= 1");
  Rng rng(seed);
  std::vector<double> theta(m);
  for (auto& t : theta) t = uniform_angle(rng);
  return theta;
}

/// Reduces every angle into [0, 2 pi) for reporting.
inline std::vector<double> wrap_angles(std::span<const double> theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> out(theta.begin(), theta.end());
  for (auto& t : out) {
    t = std::fmod(t, two_pi);
    if (t < 0.0) t += two_pi;
    if (t >= two_pi) t = 0.0;
  }
  return out;
}

}  // namespace maxland
