#pragma once

// Weighted undirected graphs, cut arithmetic, and exhaustive MaxCut.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "maxland/error.hpp"
#include "maxland/gf2.hpp"
#include "maxland/random.hpp"

namespace maxland {

struct Edge {
  int a = 0;  ///< 1-indexed, a < b
  int b = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted graph on vertices 1..n. Edges are kept in insertion order; all
/// sums over edges use that order.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n)
      : n_(checked_order(n)),
        adj_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0),
        present_(adj_.size(), 0) {}

  void add_edge(int a, int b, double w) {
    if (a < 1 || b < 1 || a > n_ || b > n_) {
      throw Error("edge (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    }
    if (a >= b) throw Error("edge endpoints must satisfy a < b");
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("edge weight must be finite and nonnegative");
    if (has_edge(a, b)) {
      throw Error("duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
    edges_.push_back({a, b, w});
    masks_.push_back(VertexSubset::of({a, b}).bits());
    adj_[idx(a, b)] = w;
    adj_[idx(b, a)] = w;
    present_[idx(a, b)] = 1;
    total_ += w;
  }

  int n() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  double total_weight() const noexcept { return total_; }
  /// Weight of (a, b), 0 when absent.
  double weight(int a, int b) const noexcept { return adj_[idx(a, b)]; }

  bool has_edge(int a, int b) const noexcept {
    if (a > b) std::swap(a, b);
    return present_[idx(a, b)] != 0;
  }

  /// Two-endpoint mask of edge i.
  std::uint64_t edge_mask(std::size_t i) const noexcept { return masks_[i]; }

  friend bool operator==(const Graph& x, const Graph& y) { return x.n_ == y.n_ && x.edges_ == y.edges_; }

 private:
  static int checked_order(int n) {
    if (n < 1 || n > kMaxVertices) throw Error("graph vertex count must be in [1, 64]");
    return n;
  }
  std::size_t idx(int a, int b) const noexcept {
    return static_cast<std::size_t>(a - 1) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b - 1);
  }

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> masks_;
  std::vector<double> adj_;
  std::vector<char> present_;
  double total_ = 0.0;
};

/// A bipartition of the vertices, stored as the side containing "1" bits.
/// The canonical representative keeps vertex 1 on the 0 side.
struct Cut {
  VertexSubset members;

  static Cut canonical(VertexSubset s, int n) {
    return Cut{s.contains(1) ? s.complement(n) : s};
  }
  friend bool operator==(const Cut&, const Cut&) = default;
  friend auto operator<=>(const Cut& a, const Cut& b) { return a.members <=> b.members; }
};

/// Sum of the weights of edges with exactly one endpoint in `s`.
inline double cut_value(const Graph& g, VertexSubset s) {
  double v = 0.0;
  const std::uint64_t bits = s.bits();
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const std::uint64_t m = bits & g.edge_mask(i);
    if (m != 0 && m != g.edge_mask(i)) v += g.edges()[i].w;
  }
  return v;
}
inline double cut_value(const Graph& g, const Cut& c) { return cut_value(g, c.members); }

/// Sum over edges of w * z_a * z_b with z = +1 outside `s`, -1 inside.
inline double ising_energy(const Graph& g, VertexSubset s) {
  double e = 0.0;
  const std::uint64_t bits = s.bits();
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    const std::uint64_t m = bits & g.edge_mask(i);
    const bool cut = m != 0 && m != g.edge_mask(i);
    e += cut ? -g.edges()[i].w : g.edges()[i].w;
  }
  return e;
}
inline double ising_energy(const Graph& g, const Cut& c) { return ising_energy(g, c.members); }

/// Parses the text graph format: '#' comment lines, a header "n m", then m
/// lines "a b w".
inline Graph load_graph(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  long long expected = 0;
  long long seen = 0;
  Graph g;
  auto tokens_of = [](const std::string& s) {
    std::vector<std::string> t;
    std::istringstream ls(s);
    for (std::string tok; ls >> tok;) t.push_back(tok);
    return t;
  };
  auto to_int = [&](const std::string& s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw ParseError(lineno, "expected integer, got '" + s + "'");
    }
    if (pos != s.size()) throw ParseError(lineno, "expected integer, got '" + s + "'");
    return v;
  };
  auto to_real = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ParseError(lineno, "expected real weight, got '" + s + "'");
    }
    if (pos != s.size()) throw ParseError(lineno, "expected real weight, got '" + s + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    const auto tok = tokens_of(line);
    if (!have_header) {
      if (tok.size() != 2) throw ParseError(lineno, "header must be 'n m'");
      const long long n = to_int(tok[0]);
      expected = to_int(tok[1]);
      if (n < 1 || n > kMaxVertices) throw ParseError(lineno, "vertex count out of range [1, 64]");
      if (expected < 0) throw ParseError(lineno, "negative edge count");
      g = Graph(static_cast<int>(n));
      have_header = true;
      continue;
    }
    if (tok.size() != 3) throw ParseError(lineno, "edge line must be 'a b w'");
    if (seen == expected) throw ParseError(lineno, "more edge lines than declared");
    const long long a = to_int(tok[0]);
    const long long b = to_int(tok[1]);
    const double w = to_real(tok[2]);
    if (a < 1 || b < 1 || a > g.n() || b > g.n()) throw ParseError(lineno, "vertex out of range");
    if (a >= b) throw ParseError(lineno, "edge endpoints must satisfy a < b");
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParseError(lineno, "negative or non-finite weight");
    if (g.has_edge(static_cast<int>(a), static_cast<int>(b))) throw ParseError(lineno, "duplicate edge");
    g.add_edge(static_cast<int>(a), static_cast<int>(b), w);
    ++seen;
  }
  if (!have_header) throw ParseError(lineno, "missing header line");
  if (seen != expected) throw ParseError(lineno, "expected " + std::to_string(expected) + " edges, found " + std::to_string(seen));
  return g;
}

inline Graph load_graph_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open graph file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return load_graph(ss.str());
}

/// Serializes in the text graph format with round-trip precision.
inline std::string save_graph(const Graph& g) {
  std::ostringstream out;
  out.precision(17);
  out << g.n() << ' ' << g.edges().size() << '\n';
  for (const auto& e : g.edges()) out << e.a << ' ' << e.b << ' ' << e.w << '\n';
  return out.str();
}

/// K_n with i.i.d. U[w_min, w_max] weights, edges in (a, b) lexicographic order.
inline Graph random_complete_graph(int n, double w_min, double w_max, std::uint64_t seed) {
  if (n < 2) throw Error("random_complete_graph: n must be >= 2");
  if (w_min > w_max) throw Error("random_complete_graph: w_min > w_max");
  if (w_min < 0.0) throw Error("random_complete_graph: weights must be nonnegative");
  Rng rng(seed);
  Graph g(n);
  for (int a = 1; a <= n; ++a) {
    for (int b = a + 1; b <= n; ++b) g.add_edge(a, b, uniform(rng, w_min, w_max));
  }
  return g;
}

inline constexpr int kDefaultBruteForceLimit = 24;

struct MaxCutResult {
  double value = 0.0;
  std::vector<Cut> argmax;  ///< every maximizing canonical cut, ascending
};

/// Exhaustive maximum over the 2^(n-1) canonical cuts, walked in Gray-code
/// order with O(n) incremental updates. The running value accumulates
/// round-off, so ties are re-evaluated exactly before being reported.
inline MaxCutResult max_cut_exact(const Graph& g, int limit = kDefaultBruteForceLimit) {
  const int n = g.n();
  if (n > limit) {
    throw LimitError("max_cut_exact: n=" + std::to_string(n) + " exceeds brute-force limit " +
                     std::to_string(limit));
  }
  const double slack = 1e-9 * (1.0 + g.total_weight());
  std::vector<std::uint64_t> candidates;
  double best = 0.0;
  std::uint64_t cur = 0;
  double value = 0.0;
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  candidates.push_back(0);
  for (std::uint64_t i = 1; i < total; ++i) {
    const int bit = std::countr_zero(i) + 1;  // vertex index - 1; vertex 1 never flips
    const int v = bit + 1;
    const bool inside = (cur >> bit) & 1U;
    double delta = 0.0;
    for (int u = 1; u <= n; ++u) {
      if (u == v) continue;
      const double w = g.weight(std::min(u, v), std::max(u, v));
      if (w == 0.0) continue;
      const bool u_inside = (cur >> (u - 1)) & 1U;
      delta += (u_inside == inside) ? w : -w;
    }
    cur ^= std::uint64_t{1} << bit;
    value += delta;
    if (value > best + slack) {
      best = value;
      candidates.clear();
      candidates.push_back(cur);
    } else if (value >= best - slack) {
      candidates.push_back(cur);
    }
  }
  MaxCutResult out;
  out.value = 0.0;
  for (auto c : candidates) out.value = std::max(out.value, cut_value(g, VertexSubset(c)));
  std::set<Cut> winners;
  for (auto c : candidates) {
    if (cut_value(g, VertexSubset(c)) == out.value) winners.insert(Cut{VertexSubset(c)});
  }
  out.argmax.assign(winners.begin(), winners.end());
  return out;
}

}  // namespace maxland
