#pragma once

// Subset algebra over GF(2): vertex subsets packed in a machine word, dynamic
// selection bitsets over an ansatz family, and the kernel of the XOR map from
// selections to vertex masks.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maxland/error.hpp"

namespace maxland {

/// Largest vertex count representable by a VertexSubset.
inline constexpr int kMaxVertices = 64;

/// Set of vertices drawn from 1..n; vertex v lives at bit v-1.
class VertexSubset {
 public:
  constexpr VertexSubset() = default;
  constexpr explicit VertexSubset(std::uint64_t bits) : bits_(bits) {}

  static VertexSubset of(std::initializer_list<int> vertices) {
    VertexSubset s;
    for (int v : vertices) s.insert(v);
    return s;
  }
  static VertexSubset from_vertices(std::span<const int> vertices) {
    VertexSubset s;
    for (int v : vertices) s.insert(v);
    return s;
  }
  /// {1, ..., n}
  static constexpr VertexSubset all(int n) {
    return VertexSubset(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }

  constexpr std::uint64_t bits() const noexcept { return bits_; }
  constexpr bool contains(int v) const noexcept { return (bits_ >> (v - 1)) & 1U; }
  constexpr int size() const noexcept { return std::popcount(bits_); }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  /// Largest vertex index present, 0 for the empty set.
  constexpr int max_vertex() const noexcept { return 64 - std::countl_zero(bits_); }

  void insert(int v) {
    if (v < 1 || v > kMaxVertices) throw Error("vertex index out of range: " + std::to_string(v));
    bits_ |= std::uint64_t{1} << (v - 1);
  }

  std::vector<int> vertices() const {
    std::vector<int> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b) + 1);
    return out;
  }

  constexpr VertexSubset complement(int n) const noexcept { return VertexSubset(bits_ ^ all(n).bits_); }

  constexpr VertexSubset& operator^=(VertexSubset o) noexcept {
    bits_ ^= o.bits_;
    return *this;
  }
  friend constexpr VertexSubset operator^(VertexSubset a, VertexSubset b) noexcept { return a ^= b; }
  friend constexpr bool operator==(VertexSubset, VertexSubset) = default;
  friend constexpr auto operator<=>(VertexSubset a, VertexSubset b) noexcept { return a.bits_ <=> b.bits_; }

  /// "{1,3,4}"
  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int v : vertices()) {
      if (!first) s += ',';
      s += std::to_string(v);
      first = false;
    }
    return s + "}";
  }

 private:
  std::uint64_t bits_ = 0;
};

/// Disjunctive union (symmetric difference).
constexpr VertexSubset xor_subsets(VertexSubset a, VertexSubset b) noexcept { return a ^ b; }

/// Dynamically sized bitset used for selections over an indexed family.
class BitRow {
 public:
  BitRow() = default;
  explicit BitRow(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  std::size_t size() const noexcept { return size_; }
  bool test(std::size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i) noexcept { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void flip(std::size_t i) noexcept { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool none() const noexcept {
    for (auto w : words_) {
      if (w != 0) return false;
    }
    return true;
  }

  BitRow& operator^=(const BitRow& o) noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
    return *this;
  }
  friend bool operator==(const BitRow&, const BitRow&) = default;
  friend bool operator<(const BitRow& a, const BitRow& b) noexcept {
    for (std::size_t i = a.words_.size(); i-- > 0;) {
      if (a.words_[i] != b.words_[i]) return a.words_[i] < b.words_[i];
    }
    return false;
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      for (std::uint64_t b = words_[w]; b != 0; b &= b - 1) {
        out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(b)));
      }
    }
    return out;
  }

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// XOR of the family members picked by `selection`.
inline VertexSubset combine(std::span<const VertexSubset> family, const BitRow& selection) {
  VertexSubset acc;
  for (std::size_t i : selection.indices()) acc ^= family[i];
  return acc;
}

/// Basis of {selections K over the family : XOR of K = empty set}.
struct KernelBasis {
  std::size_t ambient = 0;     ///< family size
  std::vector<BitRow> basis;   ///< linearly independent kernel selections

  std::size_t nullity() const noexcept { return basis.size(); }
  std::size_t rank() const noexcept { return ambient - basis.size(); }
};

namespace detail {

/// Incremental XOR basis over 64-bit vertex masks that remembers which
/// family members compose each pivot row.
class XorEliminator {
 public:
  explicit XorEliminator(std::size_t family_size) : family_size_(family_size) {}

  /// Reduces `v` against the pivots; `sel` accumulates the combination.
  /// Returns the residual mask.
  std::uint64_t reduce(std::uint64_t v, BitRow& sel) const {
    while (v != 0) {
      const int top = 63 - std::countl_zero(v);
      if (!has_[top]) break;
      v ^= pivot_vec_[top];
      sel ^= pivot_sel_[top];
    }
    return v;
  }

  /// Inserts a nonzero reduced vector as a new pivot.
  void insert(std::uint64_t v, BitRow sel) {
    const int top = 63 - std::countl_zero(v);
    has_[top] = true;
    pivot_vec_[top] = v;
    pivot_sel_[top] = std::move(sel);
  }

  std::size_t family_size() const noexcept { return family_size_; }

 private:
  std::size_t family_size_;
  bool has_[64] = {};
  std::uint64_t pivot_vec_[64] = {};
  BitRow pivot_sel_[64];
};

}  // namespace detail

/// Gaussian elimination over GF(2). Member i that reduces to zero against
/// members 0..i-1 contributes one kernel vector containing i and earlier
/// indices only, so the basis is independent by construction.
inline KernelBasis kernel_basis(std::span<const VertexSubset> family) {
  KernelBasis out;
  out.ambient = family.size();
  detail::XorEliminator elim(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    BitRow sel(family.size());
    sel.set(i);
    const std::uint64_t rest = elim.reduce(family[i].bits(), sel);
    if (rest == 0) {
      out.basis.push_back(std::move(sel));
    } else {
      elim.insert(rest, std::move(sel));
    }
  }
  return out;
}

/// Rank of the family's span over GF(2).
inline std::size_t span_rank(std::span<const VertexSubset> family) {
  return kernel_basis(family).rank();
}

/// Finds a selection of family members whose XOR equals `target`.
inline std::optional<BitRow> solve_combination(std::span<const VertexSubset> family,
                                               VertexSubset target) {
  detail::XorEliminator elim(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    BitRow sel(family.size());
    sel.set(i);
    const std::uint64_t rest = elim.reduce(family[i].bits(), sel);
    if (rest != 0) elim.insert(rest, std::move(sel));
  }
  BitRow sel(family.size());
  if (elim.reduce(target.bits(), sel) != 0) return std::nullopt;
  return sel;
}

/// Indices j of ansatz elements with exactly one of a, b in S_j.
inline std::vector<std::size_t> cut_set_elements(std::span<const VertexSubset> ansatz, int a,
                                                 int b) {
  if (a == b) throw Error("cut_set_elements: edge endpoints must differ");
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < ansatz.size(); ++j) {
    if (ansatz[j].contains(a) != ansatz[j].contains(b)) out.push_back(j);
  }
  return out;
}

inline constexpr std::size_t kDefaultEnumerationLimit = 20;

/// Visits all 2^nullity kernel selections in Gray-code order, starting with
/// the empty selection.
inline void for_each_kernel_element(const KernelBasis& kb,
                                    const std::function<void(const BitRow&)>& visit,
                                    std::size_t limit = kDefaultEnumerationLimit) {
  const std::size_t k = kb.nullity();
  if (k > limit || k >= 63) {
    throw LimitError("kernel nullity " + std::to_string(k) + " exceeds enumeration limit " +
                     std::to_string(limit));
  }
  BitRow cur(kb.ambient);
  visit(cur);
  const std::uint64_t total = std::uint64_t{1} << k;
  for (std::uint64_t i = 1; i < total; ++i) {
    cur ^= kb.basis[static_cast<std::size_t>(std::countr_zero(i))];
    visit(cur);
  }
}

/// Materialized enumeration; see for_each_kernel_element.
inline std::vector<BitRow> enumerate_kernel(const KernelBasis& kb,
                                            std::size_t limit = kDefaultEnumerationLimit) {
  std::vector<BitRow> out;
  for_each_kernel_element(kb, [&](const BitRow& r) { out.push_back(r); }, limit);
  return out;
}

}  // namespace maxland
