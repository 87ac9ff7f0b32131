#pragma once

// Landscape analysis for simple ansatze: eigenstate parameters and their
// Hessians, the cut inequalities that characterize local minima, trap
// checks, critical-point classification, the classical flip search, and
// rounding of continuous parameters to a cut.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maxland/analytic.hpp"
#include "maxland/error.hpp"
#include "maxland/gf2.hpp"
#include "maxland/graph.hpp"
#include "maxland/random.hpp"
#include "maxland/statevector.hpp"

namespace maxland {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Angles in {0, pi/2} whose pi/2 entries XOR to `c` (or its complement).
/// Throws when neither lies in the span of the ansatz masks.
inline ParamVector eigenstate_params(VertexSubset c, const SimpleAnsatz& ansatz, int n) {
  auto sel = solve_combination(ansatz.elements(), c);
  if (!sel) sel = solve_combination(ansatz.elements(), c.complement(n));
  if (!sel) {
    throw Error("cut " + c.to_string() + " is not reachable: ansatz span has dimension " +
                std::to_string(span_rank(ansatz.elements())));
  }
  ParamVector theta(ansatz.size(), 0.0);
  for (auto j : sel->indices()) theta[j] = kHalfPi;
  return theta;
}

/// 4 [CutVal(c) - CutVal(c ^ S_k)] for every element k.
inline std::vector<double> eigenstate_hessian_diag(const Graph& g, const SimpleAnsatz& ansatz, VertexSubset c) {
  const double base = cut_value(g, c);
  std::vector<double> d(ansatz.size());
  for (std::size_t k = 0; k < ansatz.size(); ++k) d[k] = 4.0 * (base - cut_value(g, c ^ ansatz[k]));
  return d;
}

/// CutVal(c) >= CutVal(c ^ S_k) for all k; ties count as satisfied.
inline bool is_local_min_cut(const Graph& g, const SimpleAnsatz& ansatz, VertexSubset c) {
  const double base = cut_value(g, c);
  for (const auto& s : ansatz.elements()) {
    if (cut_value(g, c ^ s) > base) return false;
  }
  return true;
}

/// Canonical cuts passing is_local_min_cut, ascending.
inline std::vector<Cut> enumerate_inequality_cuts(const Graph& g, const SimpleAnsatz& ansatz,
                                                  int limit = kDefaultBruteForceLimit) {
  if (g.n() > limit) throw LimitError("enumerate_inequality_cuts: n exceeds brute-force limit");
  std::vector<Cut> out;
  const std::uint64_t total = std::uint64_t{1} << (g.n() - 1);
  for (std::uint64_t i = 0; i < total; ++i) {
    const VertexSubset c(i << 1);
    if (is_local_min_cut(g, ansatz, c)) out.push_back(Cut{c});
  }
  return out;
}

struct TrapFreeReport {
  bool trap_free = false;
  std::vector<Cut> inequality_cuts;
  std::vector<Cut> max_cuts;
  std::optional<Cut> witness;  ///< a non-maximal cut satisfying the inequalities
};

/// Builds the full 2^(n-1)-1 element ansatz and checks that only maximum
/// cuts satisfy the local-minimum inequalities.
inline TrapFreeReport verify_trap_free_full_ansatz(const Graph& g, int max_n = 8) {
  if (g.n() > max_n) throw LimitError("verify_trap_free_full_ansatz: n exceeds " + std::to_string(max_n));
  if (g.n() < 2) throw Error("verify_trap_free_full_ansatz: need at least 2 vertices");
  TrapFreeReport r;
  r.inequality_cuts = enumerate_inequality_cuts(g, SimpleAnsatz::full(g.n()));
  r.max_cuts = max_cut_exact(g).argmax;
  r.trap_free = r.inequality_cuts == r.max_cuts;
  if (!r.trap_free) {
    for (const auto& c : r.inequality_cuts) {
      if (!std::binary_search(r.max_cuts.begin(), r.max_cuts.end(), c)) {
        r.witness = c;
        break;
      }
    }
  }
  return r;
}

enum class FlipPolicy { kGreedy, kRandomImproving };

struct FlipStep {
  std::size_t iteration = 0;
  std::size_t element = 0;
  VertexSubset cut;
  double value = 0.0;
};

struct FlipResult {
  Cut fixed_point;  ///< canonical
  double value = 0.0;
  std::vector<FlipStep> trace;
};

/// Local search: XOR an ansatz subset into the cut while the value strictly
/// increases. Greedy takes the largest improvement (lowest index on ties);
/// random-improving draws uniformly among improving elements.
inline FlipResult flip_algorithm(const Graph& g, const SimpleAnsatz& ansatz, VertexSubset start, FlipPolicy policy,
                                 std::uint64_t seed = 0) {
  if (start.max_vertex() > g.n()) throw Error("flip_algorithm: start cut exceeds graph order");
  Rng rng(seed);
  VertexSubset cur = start;
  double value = cut_value(g, cur);
  FlipResult res;
  std::vector<std::size_t> improving;
  for (std::size_t iter = 1;; ++iter) {
    improving.clear();
    std::size_t best_k = 0;
    double best_v = value;
    for (std::size_t k = 0; k < ansatz.size(); ++k) {
      const double v = cut_value(g, cur ^ ansatz[k]);
      if (v > value) {
        improving.push_back(k);
        if (v > best_v) {
          best_v = v;
          best_k = k;
        }
      }
    }
    if (improving.empty()) break;
    std::size_t k = best_k;
    if (policy == FlipPolicy::kRandomImproving) {
      k = improving[static_cast<std::size_t>(rng() % improving.size())];
    }
    cur ^= ansatz[k];
    value = cut_value(g, cur);
    res.trace.push_back({iter, k, cur, value});
  }
  res.fixed_point = Cut::canonical(cur, g.n());
  res.value = value;
  return res;
}

/// Objective, gradient and Hessian of a simple ansatz from the kernel
/// expansion.
class AnalyticModel {
 public:
  explicit AnalyticModel(const EdgeExpansion& exp) : exp_(&exp) {}
  const Graph& graph() const { return exp_->graph(); }
  const SimpleAnsatz& ansatz() const { return exp_->ansatz(); }
  double value(std::span<const double> theta) const { return objective(*exp_, theta); }
  std::vector<double> gradient(std::span<const double> theta) const { return maxland::gradient(*exp_, theta); }
  Eigen::MatrixXd hessian(std::span<const double> theta) const { return maxland::hessian(*exp_, theta); }

 private:
  const EdgeExpansion* exp_;
};

/// Same interface backed by the statevector simulator; the Hessian is a
/// central difference of exact gradients, symmetrized.
class SimulatedModel {
 public:
  SimulatedModel(const Graph& g, const SimpleAnsatz& ansatz)
      : graph_(g), ansatz_(ansatz), sim_(circuit_from_ansatz(ansatz, g.n()), g) {}
  const Graph& graph() const { return graph_; }
  const SimpleAnsatz& ansatz() const { return ansatz_; }
  double value(std::span<const double> theta) const { return sim_.value(theta); }
  std::vector<double> gradient(std::span<const double> theta) const { return sim_.gradient(theta); }
  Eigen::MatrixXd hessian(std::span<const double> theta, double h = 1e-5) const {
    const auto m = static_cast<Eigen::Index>(theta.size());
    Eigen::MatrixXd out(m, m);
    std::vector<double> t(theta.begin(), theta.end());
    for (Eigen::Index k = 0; k < m; ++k) {
      const double keep = t[static_cast<std::size_t>(k)];
      t[static_cast<std::size_t>(k)] = keep + h;
      const auto gp = sim_.gradient(t);
      t[static_cast<std::size_t>(k)] = keep - h;
      const auto gm = sim_.gradient(t);
      t[static_cast<std::size_t>(k)] = keep;
      for (Eigen::Index j = 0; j < m; ++j) {
        out(j, k) = (gp[static_cast<std::size_t>(j)] - gm[static_cast<std::size_t>(j)]) / (2.0 * h);
      }
    }
    return 0.5 * (out + out.transpose());
  }

 private:
  Graph graph_;
  SimpleAnsatz ansatz_;
  CircuitSimulator sim_;
};

enum class CriticalKind { kGlobalMinimum, kTrap, kStrictSaddle, kDegenerate };

inline std::string to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::kGlobalMinimum: return "global-minimum";
    case CriticalKind::kTrap: return "trap";
    case CriticalKind::kStrictSaddle: return "strict-saddle";
    case CriticalKind::kDegenerate: return "degenerate";
  }
  return "unknown";
}

struct ClassifyOptions {
  double tol_grad = 1e-7;
  /// Eigenvalue tolerance; defaults to 1e-7 (1 + |H|_inf) when unset.
  std::optional<double> tol_eig;
  double probe_step = 1e-3;
};

struct CriticalPointReport {
  std::vector<double> theta;
  double value = 0.0;
  double grad_norm = 0.0;
  std::vector<double> hessian_spectrum;  ///< ascending
  double tol_eig = 0.0;
  CriticalKind classification = CriticalKind::kDegenerate;
  std::optional<Cut> nearest_eigenstate;
  double eigenstate_distance = 0.0;
  /// Degenerate points only: a near-kernel direction along which the
  /// objective decreases at the probe step, if one was found.
  std::optional<std::vector<double>> descent_direction;
  /// Degenerate points only: largest |J(x+hv) - J(x-hv)| / (2 h^3) over
  /// near-kernel directions v.
  double third_order_response = 0.0;
};

/// Snaps every angle to the nearest multiple of pi/2. Odd multiples flip
/// their element's subset.
template <class Model>
std::pair<Cut, double> nearest_eigenstate(const Model& model, std::span<const double> theta) {
  VertexSubset c;
  double dist2 = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double m = std::round(theta[k] / kHalfPi);
    dist2 += (theta[k] - m * kHalfPi) * (theta[k] - m * kHalfPi);
    if (std::fmod(std::abs(m), 2.0) == 1.0) c ^= model.ansatz()[k];
  }
  return {Cut::canonical(c, model.graph().n()), std::sqrt(dist2)};
}

/// Classifies a critical point by its Hessian spectrum: mixed signs beyond
/// tol_eig is a strict saddle; a positive semidefinite singular Hessian (or
/// negative semidefinite singular) is degenerate and gets a third-order
/// probe; a definite Hessian is a global minimum if J <= W - 2 MaxCut + tol,
/// otherwise a trap (maxima of J included).
template <class Model>
CriticalPointReport classify_critical_point(const Model& model, std::span<const double> theta,
                                            const ClassifyOptions& opts = {}) {
  CriticalPointReport r;
  r.theta.assign(theta.begin(), theta.end());
  const auto grad = model.gradient(theta);
  for (double gk : grad) r.grad_norm = std::max(r.grad_norm, std::abs(gk));
  if (r.grad_norm > opts.tol_grad) {
    throw Error("not a critical point: gradient inf-norm " + std::to_string(r.grad_norm) + " > " +
                std::to_string(opts.tol_grad));
  }
  r.value = model.value(theta);
  const Eigen::MatrixXd h = model.hessian(theta);
  const double hnorm = h.cwiseAbs().rowwise().sum().maxCoeff();
  r.tol_eig = opts.tol_eig.value_or(1e-7 * (1.0 + hnorm));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  r.hessian_spectrum.assign(lambda.data(), lambda.data() + lambda.size());
  const double lo = lambda.minCoeff();
  const double hi = lambda.maxCoeff();
  const auto [cut, dist] = nearest_eigenstate(model, theta);
  r.nearest_eigenstate = cut;
  r.eigenstate_distance = dist;

  const Graph& g = model.graph();
  if (lo < -r.tol_eig && hi > r.tol_eig) {
    r.classification = CriticalKind::kStrictSaddle;
  } else if (lo > r.tol_eig || hi < -r.tol_eig) {
    const double floor = g.total_weight() - 2.0 * max_cut_exact(g).value;
    const double tol = 1e-9 * (1.0 + g.total_weight());
    r.classification = (lo > r.tol_eig && r.value <= floor + tol) ? CriticalKind::kGlobalMinimum : CriticalKind::kTrap;
  } else {
    r.classification = CriticalKind::kDegenerate;
    const double step = opts.probe_step;
    std::vector<double> t(theta.begin(), theta.end());
    const double drop_tol = 1e-12 * (1.0 + std::abs(r.value));
    double best_drop = -drop_tol;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (std::abs(lambda(i)) > r.tol_eig) continue;
      const Eigen::VectorXd v = eig.eigenvectors().col(i);
      double f_plus = 0.0;
      double f_minus = 0.0;
      for (int sgn : {1, -1}) {
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = theta[k] + sgn * step * v(static_cast<Eigen::Index>(k));
        const double f = model.value(t);
        (sgn > 0 ? f_plus : f_minus) = f;
        const double drop = f - r.value;
        if (drop < best_drop) {
          best_drop = drop;
          std::vector<double> dir(t.size());
          for (std::size_t k = 0; k < t.size(); ++k) dir[k] = sgn * v(static_cast<Eigen::Index>(k));
          r.descent_direction = std::move(dir);
        }
      }
      r.third_order_response =
          std::max(r.third_order_response, std::abs(f_plus - f_minus) / (2.0 * step * step * step));
    }
  }
  return r;
}

inline CriticalPointReport classify_critical_point(const EdgeExpansion& exp, std::span<const double> theta,
                                                   const ClassifyOptions& opts = {}) {
  return classify_critical_point(AnalyticModel(exp), theta, opts);
}

struct RoundResult {
  Cut cut;                        ///< canonical
  double cut_value = 0.0;
  double objective_before = 0.0;  ///< J(theta)
  double objective_snapped = 0.0; ///< J after the coordinate pass
  double cut_energy = 0.0;        ///< W - 2 CutVal(cut), the objective at the cut's eigenstate
};

/// Rounds parameters to a cut. A coordinate pass moves each theta_k to the
/// best of {0, pi/4, pi/2, 3pi/4}; a second pass resolves the pi/4-type
/// angles to the better of {0, pi/2}; the subsets at pi/2 are XORed into a
/// cut, which a greedy flip descent then improves. For the classical ansatz
/// J is affine in each cos(2 theta_k), so no step increases J.
template <class Objective>
RoundResult round_to_cut(const Graph& g, const SimpleAnsatz& ansatz, std::span<const double> theta,
                         Objective&& objective_fn) {
  if (theta.size() != ansatz.size()) throw Error("round_to_cut: parameter count mismatch");
  constexpr double q = std::numbers::pi / 4.0;
  RoundResult r;
  std::vector<double> t(theta.begin(), theta.end());
  r.objective_before = objective_fn(std::span<const double>(t));
  for (std::size_t k = 0; k < t.size(); ++k) {
    double best_a = 0.0;
    double best_f = 0.0;
    bool first = true;
    for (double a : {0.0, q, 2.0 * q, 3.0 * q}) {
      t[k] = a;
      const double f = objective_fn(std::span<const double>(t));
      if (first || f < best_f) {
        best_f = f;
        best_a = a;
        first = false;
      }
    }
    t[k] = best_a;
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] == 0.0 || t[k] == 2.0 * q) continue;
    t[k] = 0.0;
    const double f0 = objective_fn(std::span<const double>(t));
    t[k] = 2.0 * q;
    const double f1 = objective_fn(std::span<const double>(t));
    t[k] = f1 < f0 ? 2.0 * q : 0.0;
  }
  r.objective_snapped = objective_fn(std::span<const double>(t));
  VertexSubset c;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] != 0.0) c ^= ansatz[k];
  }
  const FlipResult fr = flip_algorithm(g, ansatz, c, FlipPolicy::kGreedy);
  r.cut = fr.fixed_point;
  r.cut_value = fr.value;
  r.cut_energy = g.total_weight() - 2.0 * fr.value;
  return r;
}

inline RoundResult round_to_cut(const EdgeExpansion& exp, std::span<const double> theta) {
  return round_to_cut(exp.graph(), exp.ansatz(), theta,
                      [&exp](std::span<const double> t) { return objective(exp, t); });
}

}  // namespace maxland
