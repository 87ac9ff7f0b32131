#pragma once

// Variance of gradient components over i.i.d. uniform parameters: the
// closed-form kernel-count expression and a Monte Carlo estimate.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "maxland/analytic.hpp"
#include "maxland/gf2.hpp"
#include "maxland/graph.hpp"
#include "maxland/random.hpp"
#include "maxland/statevector.hpp"

namespace maxland {

struct VarianceEdgeTerm {
  int a = 0;
  int b = 0;
  double w_squared = 0.0;
  std::size_t log2_kernel_size = 0;  ///< nullity, |K| = 2^nullity
  std::size_t cut_set_size = 0;      ///< |C|

  /// 4 w^2 |K| / 2^|C|
  double contribution() const {
    return 4.0 * w_squared *
           std::ldexp(1.0, static_cast<int>(log2_kernel_size) - static_cast<int>(cut_set_size));
  }
};

struct VarianceReport {
  std::size_t k = 0;
  std::optional<double> analytic;
  std::optional<double> monte_carlo;
  std::optional<double> mc_stderr;
  std::optional<double> mc_mean;
  std::optional<double> mc_mean_stderr;
  std::size_t samples = 0;
  std::vector<VarianceEdgeTerm> per_edge_terms;

  /// |analytic - monte_carlo| > 5 stderr; empty unless both sides are present.
  std::optional<bool> discrepancy() const {
    if (!analytic || !monte_carlo || !mc_stderr) return std::nullopt;
    return std::abs(*analytic - *monte_carlo) > 5.0 * *mc_stderr;
  }
};

/// Closed-form Var(dJ/dtheta_k) = 4 sum_{(a,b) in Cut(S_k)} w^2 |K_(a,b)| / 2^|C_(a,b)|,
/// with |K| taken as 2^nullity from GF(2) elimination.
inline VarianceReport variance_analytic(const Graph& g, const SimpleAnsatz& ansatz, std::size_t k) {
  if (k >= ansatz.size()) throw Error("variance_analytic: element index out of range");
  VarianceReport r;
  r.k = k;
  double total = 0.0;
  for (const auto& e : g.edges()) {
    if (ansatz[k].contains(e.a) == ansatz[k].contains(e.b)) continue;
    const auto c = cut_set_elements(ansatz.elements(), e.a, e.b);
    std::vector<VertexSubset> masks;
    masks.reserve(c.size());
    for (auto j : c) masks.push_back(ansatz[j]);
    VarianceEdgeTerm term{e.a, e.b, e.w * e.w, kernel_basis(masks).nullity(), c.size()};
    total += term.contribution();
    r.per_edge_terms.push_back(term);
  }
  r.analytic = total;
  return r;
}

namespace detail {

inline constexpr std::size_t kMonteCarloChunk = 4096;

/// Sample variance, its standard error (from the fourth central moment),
/// the sample mean and its standard error.
inline void finish_moments(std::span<const double> xs, VarianceReport& r) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const double var = m2 / (n - 1.0);
  m4 /= n;
  const double pop = m2 / n;
  r.monte_carlo = var;
  r.mc_stderr = std::sqrt(std::max(0.0, m4 - pop * pop) / n);
  r.mc_mean = mean;
  r.mc_mean_stderr = std::sqrt(var / n);
  r.samples = xs.size();
}

}  // namespace detail

/// Monte Carlo estimate over theta ~ U[0, 2 pi)^M. Samples are drawn in
/// chunks of 4096, chunk c seeded with derive_seed(seed, c).
inline VarianceReport variance_monte_carlo(const EdgeExpansion& exp, std::size_t k, std::size_t samples,
                                           std::uint64_t seed) {
  if (samples < 100) throw Error("variance_monte_carlo: need at least 100 samples");
  if (k >= exp.num_params()) throw Error("variance_monte_carlo: element index out of range");
  std::vector<double> xs;
  xs.reserve(samples);
  std::vector<double> theta(exp.num_params());
  for (std::size_t chunk = 0; xs.size() < samples; ++chunk) {
    Rng rng(derive_seed(seed, chunk));
    for (std::size_t i = 0; i < detail::kMonteCarloChunk && xs.size() < samples; ++i) {
      for (auto& t : theta) t = uniform_angle(rng);
      const auto [s, t] = s_t_terms(exp, theta, k);
      xs.push_back(2.0 * (-std::sin(2.0 * theta[k]) * s + std::cos(2.0 * theta[k]) * t));
    }
  }
  VarianceReport r;
  r.k = k;
  detail::finish_moments(xs, r);
  return r;
}

/// Empirical variance for arbitrary circuits through adjoint gradients.
inline VarianceReport variance_monte_carlo(const CircuitSimulator& sim, std::size_t k, std::size_t samples,
                                           std::uint64_t seed) {
  if (samples < 100) throw Error("variance_monte_carlo: need at least 100 samples");
  if (k >= sim.num_params()) throw Error("variance_monte_carlo: parameter index out of range");
  std::vector<double> xs;
  xs.reserve(samples);
  std::vector<double> theta(sim.num_params());
  std::vector<double> grad(sim.num_params());
  for (std::size_t chunk = 0; xs.size() < samples; ++chunk) {
    Rng rng(derive_seed(seed, chunk));
    for (std::size_t i = 0; i < detail::kMonteCarloChunk && xs.size() < samples; ++i) {
      for (auto& t : theta) t = uniform_angle(rng);
      sim.value_and_gradient(theta, grad);
      xs.push_back(grad[k]);
    }
  }
  VarianceReport r;
  r.k = k;
  detail::finish_moments(xs, r);
  return r;
}

/// Both estimates in one report.
inline VarianceReport variance_compare(const EdgeExpansion& exp, std::size_t k, std::size_t samples,
                                       std::uint64_t seed) {
  VarianceReport r = variance_analytic(exp.graph(), exp.ansatz(), k);
  const VarianceReport mc = variance_monte_carlo(exp, k, samples, seed);
  r.monte_carlo = mc.monte_carlo;
  r.mc_stderr = mc.mc_stderr;
  r.mc_mean = mc.mc_mean;
  r.mc_mean_stderr = mc.mc_mean_stderr;
  r.samples = mc.samples;
  return r;
}

}  // namespace maxland
