#pragma once

// Closed-form objective, gradient and Hessian for simple ansatze: products of
// commuting Pauli-X strings acting on |0...0>, measured against the Ising
// Hamiltonian of a graph.
//
// For edge (a, b) let C be the ansatz elements containing exactly one of the
// endpoints and K range over selections of C whose masks XOR to the empty
// set. Then
//
//   J(theta) = sum_(a,b) w_ab sum_K (-1)^(|K|/2) prod_{j in C\K} cos(2 theta_j)
//                                               prod_{j in K}   sin(2 theta_j)
//
// Every selection inside one C has even size, because each member
// anticommutes with Z_a Z_b while the product over K is the identity.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "maxland/error.hpp"
#include "maxland/gf2.hpp"
#include "maxland/graph.hpp"

namespace maxland {

/// Angles in radians, one per variational layer.
using ParamVector = std::vector<double>;

/// Ordered list of commuting X-string generators, one vertex subset each.
class SimpleAnsatz {
 public:
  SimpleAnsatz() = default;
  explicit SimpleAnsatz(std::vector<VertexSubset> elements) : elements_(std::move(elements)) {
    for (std::size_t j = 0; j < elements_.size(); ++j) {
      if (elements_[j].empty()) {
        throw Error("ansatz element " + std::to_string(j) + " is the empty set");
      }
    }
  }

  /// {X_1, ..., X_n}
  static SimpleAnsatz classical(int n) {
    std::vector<VertexSubset> e;
    for (int v = 1; v <= n; ++v) e.push_back(VertexSubset::of({v}));
    return SimpleAnsatz(std::move(e));
  }

  /// All subsets of cardinality 1..max_depth, grouped by cardinality, each
  /// group in lexicographic order of sorted vertex lists.
  static SimpleAnsatz up_to_depth(int n, int max_depth) {
    if (max_depth < 1 || max_depth > n) throw Error("k-body depth must lie in [1, n]");
    std::vector<VertexSubset> e;
    for (int k = 1; k <= max_depth; ++k) {
      std::vector<int> idx(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i + 1;
      while (true) {
        e.push_back(VertexSubset::from_vertices(idx));
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i + 1) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
    return SimpleAnsatz(std::move(e));
  }

  /// The 2^(n-1)-1 nonempty subsets of {2..n}: one representative of every
  /// nontrivial cut.
  static SimpleAnsatz full(int n) {
    std::vector<VertexSubset> e;
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << (n - 1)); ++m) e.emplace_back(m << 1);
    return SimpleAnsatz(std::move(e));
  }

  std::size_t size() const noexcept { return elements_.size(); }
  const VertexSubset& operator[](std::size_t j) const { return elements_[j]; }
  const std::vector<VertexSubset>& elements() const noexcept { return elements_; }
  /// Largest element cardinality.
  int depth() const noexcept {
    int d = 0;
    for (auto e : elements_) d = std::max(d, e.size());
    return d;
  }

 private:
  std::vector<VertexSubset> elements_;
};

/// Parses the ansatz text format: one element per line as vertex indices, or
/// a single directive "depth D". Blank lines and '#' comments are skipped.
inline SimpleAnsatz load_ansatz(std::string_view text, int n) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::vector<VertexSubset> elements;
  bool directive = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok[0] == "depth") {
      if (directive || !elements.empty() || tok.size() != 2) {
        throw ParseError(lineno, "'depth D' must be the only entry");
      }
      int d = 0;
      try {
        d = std::stoi(tok[1]);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad depth '" + tok[1] + "'");
      }
      if (d < 1 || d > n) throw ParseError(lineno, "depth out of range [1, n]");
      elements = SimpleAnsatz::up_to_depth(n, d).elements();
      directive = true;
      continue;
    }
    if (directive) throw ParseError(lineno, "'depth D' must be the only entry");
    VertexSubset s;
    for (const auto& t : tok) {
      std::size_t pos = 0;
      int v = 0;
      try {
        v = std::stoi(t, &pos);
      } catch (const std::exception&) {
        throw ParseError(lineno, "bad vertex '" + t + "'");
      }
      if (pos != t.size() || v < 1 || v > n) throw ParseError(lineno, "vertex out of range: '" + t + "'");
      if (s.contains(v)) throw ParseError(lineno, "repeated vertex " + t);
      s.insert(v);
    }
    elements.push_back(s);
  }
  if (elements.empty()) throw ParseError(lineno, "ansatz has no elements");
  return SimpleAnsatz(std::move(elements));
}

inline SimpleAnsatz load_ansatz_file(const std::string& path, int n) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open ansatz file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return load_ansatz(ss.str(), n);
}

/// Precomputed kernel terms of one edge.
struct EdgeTerms {
  int a = 0;
  int b = 0;
  double w = 0.0;
  std::vector<std::size_t> elements;  ///< ansatz indices forming C_(a,b)
  KernelBasis kernel;                 ///< over the masks of `elements`
  std::size_t term_count = 0;         ///< 2^nullity
  /// Row-major term_count x |C| flags: position p of term t lies in K.
  std::vector<std::uint8_t> in_selection;
  std::vector<double> sign;           ///< (-1)^(|K|/2) per term

  std::size_t width() const noexcept { return elements.size(); }
};

/// Per-edge kernel expansion of a (graph, simple ansatz) pair.
class EdgeExpansion {
 public:
  const Graph& graph() const noexcept { return graph_; }
  const SimpleAnsatz& ansatz() const noexcept { return ansatz_; }
  const std::vector<EdgeTerms>& edges() const noexcept { return edges_; }
  std::size_t num_params() const noexcept { return ansatz_.size(); }
  /// Sum over edges of 2^nullity.
  std::uint64_t total_terms() const noexcept { return total_terms_; }
  /// Sum over edges of 2^nullity * |C|; proportional to evaluation cost.
  std::uint64_t total_work() const noexcept { return total_work_; }

 private:
  friend EdgeExpansion build_expansion(const Graph&, const SimpleAnsatz&, std::size_t);
  Graph graph_;
  SimpleAnsatz ansatz_;
  std::vector<EdgeTerms> edges_;
  std::uint64_t total_terms_ = 0;
  std::uint64_t total_work_ = 0;
};

/// Builds C_(a,b), its kernel basis and the enumerated kernel terms for
/// every edge. Throws LimitError naming the first edge whose nullity exceeds
/// `enumeration_limit`.
inline EdgeExpansion build_expansion(const Graph& g, const SimpleAnsatz& ansatz,
                                     std::size_t enumeration_limit = kDefaultEnumerationLimit) {
  for (const auto& s : ansatz.elements()) {
    if (s.max_vertex() > g.n()) throw Error("ansatz element " + s.to_string() + " exceeds graph order");
  }
  EdgeExpansion out;
  out.graph_ = g;
  out.ansatz_ = ansatz;
  for (const auto& e : g.edges()) {
    EdgeTerms et;
    et.a = e.a;
    et.b = e.b;
    et.w = e.w;
    et.elements = cut_set_elements(ansatz.elements(), e.a, e.b);
    std::vector<VertexSubset> masks;
    masks.reserve(et.elements.size());
    for (auto j : et.elements) masks.push_back(ansatz[j]);
    et.kernel = kernel_basis(masks);
    if (et.kernel.nullity() > enumeration_limit) {
      throw LimitError("edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + "): kernel nullity " +
                       std::to_string(et.kernel.nullity()) + " exceeds enumeration limit " +
                       std::to_string(enumeration_limit));
    }
    const std::size_t width = et.width();
    for_each_kernel_element(
        et.kernel,
        [&](const BitRow& sel) {
          const std::size_t size = sel.count();
          assert(combine(masks, sel).empty());
          if (size % 2 != 0) {
            throw Error("internal: odd kernel selection inside C(" + std::to_string(e.a) + "," +
                        std::to_string(e.b) + ")");
          }
          for (std::size_t p = 0; p < width; ++p) et.in_selection.push_back(sel.test(p) ? 1 : 0);
          et.sign.push_back((size / 2) % 2 == 0 ? 1.0 : -1.0);
        },
        enumeration_limit);
    et.term_count = et.sign.size();
    out.total_terms_ += et.term_count;
    out.total_work_ += et.term_count * std::max<std::size_t>(width, 1);
    out.edges_.push_back(std::move(et));
  }
  return out;
}

namespace detail {

inline void check_length(const EdgeExpansion& exp, std::span<const double> theta) {
  if (theta.size() != exp.num_params()) {
    throw Error("parameter vector has " + std::to_string(theta.size()) + " entries, ansatz has " +
                std::to_string(exp.num_params()));
  }
}

struct Trig {
  std::vector<double> c;  // cos(2 theta)
  std::vector<double> s;  // sin(2 theta)
  explicit Trig(std::span<const double> theta) : c(theta.size()), s(theta.size()) {
    for (std::size_t j = 0; j < theta.size(); ++j) {
      c[j] = std::cos(2.0 * theta[j]);
      s[j] = std::sin(2.0 * theta[j]);
    }
  }
};

/// Loads the factors of term t into `f` and the prefix/suffix products
/// into `pre`/`suf` (pre[p] = prod f[0..p), suf[p] = prod f[p..w)).
inline void term_factors(const EdgeTerms& et, std::size_t t, const Trig& tr, std::vector<double>& f,
                         std::vector<double>& pre, std::vector<double>& suf) {
  const std::size_t w = et.width();
  f.resize(w);
  pre.resize(w + 1);
  suf.resize(w + 1);
  const std::uint8_t* row = et.in_selection.data() + t * w;
  for (std::size_t p = 0; p < w; ++p) {
    const std::size_t j = et.elements[p];
    f[p] = row[p] ? tr.s[j] : tr.c[j];
  }
  pre[0] = 1.0;
  for (std::size_t p = 0; p < w; ++p) pre[p + 1] = pre[p] * f[p];
  suf[w] = 1.0;
  for (std::size_t p = w; p-- > 0;) suf[p] = suf[p + 1] * f[p];
}

}  // namespace detail

/// J(theta) = <0| U^dag H_p U |0>.
inline double objective(const EdgeExpansion& exp, std::span<const double> theta) {
  detail::check_length(exp, theta);
  const detail::Trig tr(theta);
  double total = 0.0;
  for (const auto& et : exp.edges()) {
    const std::size_t w = et.width();
    double edge_sum = 0.0;
    for (std::size_t t = 0; t < et.term_count; ++t) {
      const std::uint8_t* row = et.in_selection.data() + t * w;
      double prod = et.sign[t];
      for (std::size_t p = 0; p < w; ++p) {
        const std::size_t j = et.elements[p];
        prod *= row[p] ? tr.s[j] : tr.c[j];
      }
      edge_sum += prod;
    }
    total += et.w * edge_sum;
  }
  return total;
}

/// Coefficients of cos(2 theta_k) and sin(2 theta_k) in J.
struct STTerms {
  std::vector<double> s;
  std::vector<double> t;
};

/// S_k and T_k for every k, each summand built with the theta_k factor
/// omitted (prefix/suffix products), so both are exactly independent of
/// theta_k and no division by cos or sin ever happens.
inline STTerms s_t_all(const EdgeExpansion& exp, std::span<const double> theta) {
  detail::check_length(exp, theta);
  const detail::Trig tr(theta);
  STTerms out{std::vector<double>(theta.size(), 0.0), std::vector<double>(theta.size(), 0.0)};
  std::vector<double> f, pre, suf;
  std::vector<double> edge_s, edge_t;
  for (const auto& et : exp.edges()) {
    const std::size_t w = et.width();
    edge_s.assign(w, 0.0);
    edge_t.assign(w, 0.0);
    for (std::size_t t = 0; t < et.term_count; ++t) {
      detail::term_factors(et, t, tr, f, pre, suf);
      const std::uint8_t* row = et.in_selection.data() + t * w;
      for (std::size_t p = 0; p < w; ++p) {
        const double omitted = et.sign[t] * pre[p] * suf[p + 1];
        (row[p] ? edge_t : edge_s)[p] += omitted;
      }
    }
    for (std::size_t p = 0; p < w; ++p) {
      out.s[et.elements[p]] += et.w * edge_s[p];
      out.t[et.elements[p]] += et.w * edge_t[p];
    }
  }
  return out;
}

/// (S_k, T_k) for a single index.
inline std::pair<double, double> s_t_terms(const EdgeExpansion& exp, std::span<const double> theta,
                                           std::size_t k) {
  detail::check_length(exp, theta);
  if (k >= theta.size()) throw Error("s_t_terms: index out of range");
  const detail::Trig tr(theta);
  double s = 0.0;
  double t_sum = 0.0;
  for (const auto& et : exp.edges()) {
    const std::size_t w = et.width();
    std::size_t pk = w;
    for (std::size_t p = 0; p < w; ++p) {
      if (et.elements[p] == k) pk = p;
    }
    if (pk == w) continue;
    double es = 0.0;
    double etot = 0.0;
    for (std::size_t t = 0; t < et.term_count; ++t) {
      const std::uint8_t* row = et.in_selection.data() + t * w;
      double prod = et.sign[t];
      for (std::size_t p = 0; p < w; ++p) {
        if (p == pk) continue;
        const std::size_t j = et.elements[p];
        prod *= row[p] ? tr.s[j] : tr.c[j];
      }
      (row[pk] ? etot : es) += prod;
    }
    s += et.w * es;
    t_sum += et.w * etot;
  }
  return {s, t_sum};
}

/// dJ/dtheta_k = 2 [ -sin(2 theta_k) S_k + cos(2 theta_k) T_k ].
inline std::vector<double> gradient(const EdgeExpansion& exp, std::span<const double> theta) {
  const STTerms st = s_t_all(exp, theta);
  std::vector<double> g(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    g[k] = 2.0 * (-std::sin(2.0 * theta[k]) * st.s[k] + std::cos(2.0 * theta[k]) * st.t[k]);
  }
  return g;
}

/// Full Hessian. The diagonal is -4 [cos(2 theta_k) S_k + sin(2 theta_k) T_k];
/// off-diagonal entries differentiate each kernel summand once in each of
/// the two coordinates (cos -> -2 sin, sin -> 2 cos).
inline Eigen::MatrixXd hessian(const EdgeExpansion& exp, std::span<const double> theta) {
  const STTerms st = s_t_all(exp, theta);
  const std::size_t m = theta.size();
  const detail::Trig tr(theta);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<double> f, pre, suf, d, hf, hpre, hsuf;
  for (const auto& et : exp.edges()) {
    const std::size_t w = et.width();
    if (w < 2) continue;
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(w));
    d.resize(w);
    hf.resize(w);
    hpre.resize(w + 1);
    hsuf.resize(w + 1);
    for (std::size_t t = 0; t < et.term_count; ++t) {
      detail::term_factors(et, t, tr, f, pre, suf);
      const std::uint8_t* row = et.in_selection.data() + t * w;
      for (std::size_t p = 0; p < w; ++p) {
        const std::size_t j = et.elements[p];
        d[p] = row[p] ? 2.0 * tr.c[j] : -2.0 * tr.s[j];
      }
      for (std::size_t p = 0; p + 1 < w; ++p) {
        hf = f;
        hf[p] = d[p];
        hpre[0] = 1.0;
        for (std::size_t q = 0; q < w; ++q) hpre[q + 1] = hpre[q] * hf[q];
        hsuf[w] = 1.0;
        for (std::size_t q = w; q-- > 0;) hsuf[q] = hsuf[q + 1] * hf[q];
        for (std::size_t q = p + 1; q < w; ++q) {
          local(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) +=
              et.sign[t] * hpre[q] * hsuf[q + 1] * d[q];
        }
      }
    }
    for (std::size_t p = 0; p < w; ++p) {
      for (std::size_t q = p + 1; q < w; ++q) {
        const auto jp = static_cast<Eigen::Index>(et.elements[p]);
        const auto jq = static_cast<Eigen::Index>(et.elements[q]);
        const double v = et.w * local(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
        h(jp, jq) += v;
        if (jp != jq) h(jq, jp) += v;
      }
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    h(i, i) = -4.0 * (std::cos(2.0 * theta[k]) * st.s[k] + std::sin(2.0 * theta[k]) * st.t[k]);
  }
  return h;
}

}  // namespace maxland
