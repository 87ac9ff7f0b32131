#pragma once

// Dense 2^n statevector simulation of X-string, Z-string, Ising and field
// rotations, Ising expectation values, adjoint-mode gradients and sampling.
// Basis index bit v-1 set means vertex v sits on the "1" side of the cut.

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "maxland/analytic.hpp"
#include "maxland/error.hpp"
#include "maxland/gf2.hpp"
#include "maxland/graph.hpp"
#include "maxland/random.hpp"

namespace maxland {

using Amplitude = std::complex<double>;

inline constexpr int kDefaultQubitLimit = 26;

enum class InitialState { kZeros, kPlus };

inline std::string to_string(InitialState s) { return s == InitialState::kZeros ? "zeros" : "plus"; }

class StateVector {
 public:
  StateVector() = default;
  StateVector(int n, std::vector<Amplitude> amps) : n_(n), amps_(std::move(amps)) {
    if (amps_.size() != (std::size_t{1} << n)) throw Error("statevector size must be 2^n");
  }

  int num_qubits() const noexcept { return n_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  std::span<Amplitude> amplitudes() noexcept { return amps_; }
  std::span<const Amplitude> amplitudes() const noexcept { return amps_; }
  Amplitude& operator[](std::size_t i) noexcept { return amps_[i]; }
  const Amplitude& operator[](std::size_t i) const noexcept { return amps_[i]; }

  double norm() const noexcept {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

 private:
  int n_ = 0;
  std::vector<Amplitude> amps_;
};

inline StateVector init_state(int n, InitialState tag, int qubit_limit = kDefaultQubitLimit) {
  if (n < 1 || n > qubit_limit) {
    throw LimitError("qubit count " + std::to_string(n) + " outside [1, " + std::to_string(qubit_limit) + "]");
  }
  const std::size_t dim = std::size_t{1} << n;
  std::vector<Amplitude> amps(dim, Amplitude{0.0, 0.0});
  if (tag == InitialState::kZeros) {
    amps[0] = 1.0;
  } else {
    const double a = std::pow(2.0, -0.5 * n);
    std::fill(amps.begin(), amps.end(), Amplitude{a, 0.0});
  }
  return StateVector(n, std::move(amps));
}

/// Ising energies E(x) = sum w z_a z_b of every basis state.
class IsingDiagonal {
 public:
  IsingDiagonal() = default;
  explicit IsingDiagonal(const Graph& g, int qubit_limit = kDefaultQubitLimit) : n_(g.n()), total_(g.total_weight()) {
    if (n_ > qubit_limit) throw LimitError("Ising diagonal: n exceeds qubit limit");
    const std::size_t dim = std::size_t{1} << n_;
    energies_.assign(dim, 0.0);
    for (std::size_t x = 0; x < dim; ++x) energies_[x] = ising_energy(g, VertexSubset(x));
  }
  int num_qubits() const noexcept { return n_; }
  double total_weight() const noexcept { return total_; }
  std::span<const double> energies() const noexcept { return energies_; }
  double operator[](std::size_t x) const noexcept { return energies_[x]; }

 private:
  int n_ = 0;
  double total_ = 0.0;
  std::vector<double> energies_;
};

namespace detail {

inline void require_mask(const StateVector& s, VertexSubset mask) {
  if (mask.empty()) throw Error("rotation mask must be nonempty");
  if (mask.max_vertex() > s.num_qubits()) throw Error("rotation mask exceeds qubit count");
}

inline double z_parity(std::uint64_t x, std::uint64_t mask) noexcept {
  return (std::popcount(x & mask) & 1) ? -1.0 : 1.0;
}

inline double z_field(std::uint64_t x, int n) noexcept {
  return static_cast<double>(n - 2 * std::popcount(x));
}

}  // namespace detail

/// exp(-i theta X_mask) = cos(theta) - i sin(theta) X_mask, applied over the
/// pairs (x, x ^ mask) with the lowest mask bit clear in x.
inline void apply_x_rotation(StateVector& state, VertexSubset mask, double theta) {
  detail::require_mask(state, mask);
  const std::uint64_t m = mask.bits();
  const std::uint64_t low = m & (~m + 1);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  auto amps = state.amplitudes();
  for (std::uint64_t x = 0; x < amps.size(); ++x) {
    if (x & low) continue;
    const std::uint64_t y = x ^ m;
    const Amplitude ax = amps[x];
    const Amplitude ay = amps[y];
    // -i s a = (s a.imag, -s a.real)
    amps[x] = Amplitude(c * ax.real() + s * ay.imag(), c * ax.imag() - s * ay.real());
    amps[y] = Amplitude(c * ay.real() + s * ax.imag(), c * ay.imag() - s * ax.real());
  }
}

namespace detail {

template <class PhaseOf>
void apply_diagonal_phase(StateVector& state, double theta, PhaseOf&& eigenvalue) {
  auto amps = state.amplitudes();
  for (std::uint64_t x = 0; x < amps.size(); ++x) {
    const double phi = -theta * eigenvalue(x);
    amps[x] *= Amplitude(std::cos(phi), std::sin(phi));
  }
}

}  // namespace detail

/// exp(-i theta Z_mask): phase e^{-i theta p(x)}, p = +1 on even overlap parity.
inline void apply_z_rotation(StateVector& state, VertexSubset mask, double theta) {
  detail::require_mask(state, mask);
  const std::uint64_t m = mask.bits();
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  auto amps = state.amplitudes();
  const Amplitude even(c, -s);
  const Amplitude odd(c, s);
  for (std::uint64_t x = 0; x < amps.size(); ++x) amps[x] *= (std::popcount(x & m) & 1) ? odd : even;
}

/// exp(-i theta H_p).
inline void apply_ising_evolution(StateVector& state, const IsingDiagonal& diag, double theta) {
  if (diag.num_qubits() != state.num_qubits()) throw Error("Ising diagonal does not match state size");
  detail::apply_diagonal_phase(state, theta, [&](std::uint64_t x) { return diag[x]; });
}

inline void apply_ising_evolution(StateVector& state, const Graph& g, double theta) {
  apply_ising_evolution(state, IsingDiagonal(g), theta);
}

/// exp(-i theta sum_i X_i).
inline void apply_transverse_x(StateVector& state, double theta) {
  for (int v = 1; v <= state.num_qubits(); ++v) apply_x_rotation(state, VertexSubset::of({v}), theta);
}

/// exp(-i theta sum_i Z_i).
inline void apply_z_field(StateVector& state, double theta) {
  const int n = state.num_qubits();
  detail::apply_diagonal_phase(state, theta, [n](std::uint64_t x) { return detail::z_field(x, n); });
}

/// <psi| H_p |psi>, summed in index order.
inline double expectation(const StateVector& state, const IsingDiagonal& diag) {
  if (diag.num_qubits() != state.num_qubits()) throw Error("Ising diagonal does not match state size");
  double e = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t x = 0; x < amps.size(); ++x) e += std::norm(amps[x]) * diag[x];
  return e;
}

inline double expectation(const StateVector& state, const Graph& g) { return expectation(state, IsingDiagonal(g)); }

enum class LayerKind {
  kXRotation,    ///< exp(-i theta X_S), one parameter
  kZRotation,    ///< exp(-i theta Z_S), one parameter
  kIsing,        ///< exp(-i theta H_p), one parameter
  kXLocal,       ///< prod_i exp(-i theta_i X_i), n parameters
  kTransverseX,  ///< exp(-i theta sum_i X_i), one shared parameter
  kZField,       ///< exp(-i theta sum_i Z_i), one shared parameter
};

struct Layer {
  LayerKind kind = LayerKind::kXRotation;
  VertexSubset mask;  ///< only for kXRotation / kZRotation

  static Layer x_rotation(VertexSubset m) { return {LayerKind::kXRotation, m}; }
  static Layer z_rotation(VertexSubset m) { return {LayerKind::kZRotation, m}; }
  static Layer ising() { return {LayerKind::kIsing, {}}; }
  static Layer x_local() { return {LayerKind::kXLocal, {}}; }
  static Layer transverse_x() { return {LayerKind::kTransverseX, {}}; }
  static Layer z_field() { return {LayerKind::kZField, {}}; }
};

/// Ordered layer sequence on n qubits. Parameter slots are assigned in layer
/// order; an x-local layer consumes n consecutive slots (qubit 1 first).
class Circuit {
 public:
  Circuit() = default;
  Circuit(int n, InitialState init) : n_(n), init_(init) {
    if (n < 1 || n > kMaxVertices) throw Error("circuit qubit count out of range");
  }

  Circuit& add(Layer layer) {
    if (layer.kind == LayerKind::kXRotation || layer.kind == LayerKind::kZRotation) {
      if (layer.mask.empty()) throw Error("rotation layer mask must be nonempty");
      if (layer.mask.max_vertex() > n_) throw Error("rotation layer mask exceeds qubit count");
    }
    layers_.push_back(layer);
    params_ += slots(layer);
    return *this;
  }

  int num_qubits() const noexcept { return n_; }
  InitialState initial_state() const noexcept { return init_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::size_t num_params() const noexcept { return params_; }
  std::size_t slots(const Layer& l) const noexcept {
    return l.kind == LayerKind::kXLocal ? static_cast<std::size_t>(n_) : 1;
  }
  /// True when every layer is an X-string rotation on |0...0>.
  bool is_simple() const noexcept {
    if (init_ != InitialState::kZeros) return false;
    return std::all_of(layers_.begin(), layers_.end(),
                       [](const Layer& l) { return l.kind == LayerKind::kXRotation; });
  }

 private:
  int n_ = 0;
  InitialState init_ = InitialState::kZeros;
  std::vector<Layer> layers_;
  std::size_t params_ = 0;
};

/// One X-rotation layer per ansatz element on |0...0>.
inline Circuit circuit_from_ansatz(const SimpleAnsatz& ansatz, int n) {
  Circuit c(n, InitialState::kZeros);
  for (const auto& s : ansatz.elements()) c.add(Layer::x_rotation(s));
  return c;
}

/// Ansatz to SimpleAnsatz, when the circuit is simple.
inline SimpleAnsatz ansatz_from_circuit(const Circuit& c) {
  if (!c.is_simple()) throw Error("circuit is not a simple X-string ansatz on |0...0>");
  std::vector<VertexSubset> e;
  for (const auto& l : c.layers()) e.push_back(l.mask);
  return SimpleAnsatz(std::move(e));
}

enum class XZVariant { kSubsetZ, kGlobalZ };

/// Each X_S element followed by Z_S (kSubsetZ) or by sum_i Z_i (kGlobalZ).
inline Circuit xz_circuit(const SimpleAnsatz& ansatz, int n, XZVariant variant) {
  Circuit c(n, InitialState::kZeros);
  for (const auto& s : ansatz.elements()) {
    c.add(Layer::x_rotation(s));
    c.add(variant == XZVariant::kSubsetZ ? Layer::z_rotation(s) : Layer::z_field());
  }
  return c;
}

/// Standard QAOA on |+>: (Ising, transverse X) repeated `p` times; M = 2p.
inline Circuit qaoa_circuit(int n, int p) {
  Circuit c(n, InitialState::kPlus);
  for (int i = 0; i < p; ++i) {
    c.add(Layer::ising());
    c.add(Layer::transverse_x());
  }
  return c;
}

/// QAOA with n independent X rotations per layer: x-local, then
/// (Ising, x-local) repeated p-1 times; M = n + (p-1)(n+1).
inline Circuit qaoa_xlocal_circuit(int n, int p, InitialState init) {
  if (p < 1) throw Error("QAOA layer count must be >= 1");
  Circuit c(n, init);
  c.add(Layer::x_local());
  for (int i = 1; i < p; ++i) {
    c.add(Layer::ising());
    c.add(Layer::x_local());
  }
  return c;
}

/// Parses the circuit text format: optional "init zeros|plus" header, then one
/// layer per line: "xrot v...", "zrot v...", "ising", "xlocal", "xmix", "zsum".
inline Circuit load_circuit(std::string_view text, int n) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  InitialState init = InitialState::kZeros;
  std::vector<Layer> layers;
  bool seen_layer = false;
  bool seen_init = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    const std::string& kw = tok[0];
    if (kw == "init") {
      if (seen_layer || seen_init) throw ParseError(lineno, "'init' must precede all layers and appear once");
      if (tok.size() != 2 || (tok[1] != "zeros" && tok[1] != "plus")) {
        throw ParseError(lineno, "expected 'init zeros' or 'init plus'");
      }
      init = tok[1] == "zeros" ? InitialState::kZeros : InitialState::kPlus;
      seen_init = true;
      continue;
    }
    seen_layer = true;
    if (kw == "xrot" || kw == "zrot") {
      VertexSubset s;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        std::size_t pos = 0;
        int v = 0;
        try {
          v = std::stoi(tok[i], &pos);
        } catch (const std::exception&) {
          throw ParseError(lineno, "bad vertex '" + tok[i] + "'");
        }
        if (pos != tok[i].size() || v < 1 || v > n) throw ParseError(lineno, "vertex out of range: " + tok[i]);
        s.insert(v);
      }
      if (s.empty()) throw ParseError(lineno, kw + " needs at least one vertex");
      layers.push_back(kw == "xrot" ? Layer::x_rotation(s) : Layer::z_rotation(s));
    } else if (tok.size() != 1) {
      throw ParseError(lineno, "'" + kw + "' takes no arguments");
    } else if (kw == "ising") {
      layers.push_back(Layer::ising());
    } else if (kw == "xlocal") {
      layers.push_back(Layer::x_local());
    } else if (kw == "xmix") {
      layers.push_back(Layer::transverse_x());
    } else if (kw == "zsum") {
      layers.push_back(Layer::z_field());
    } else {
      throw ParseError(lineno, "unknown layer '" + kw + "'");
    }
  }
  Circuit c(n, init);
  for (const auto& l : layers) c.add(l);
  if (c.layers().empty()) throw ParseError(lineno, "circuit has no layers");
  return c;
}

inline Circuit load_circuit_file(const std::string& path, int n) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open circuit file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return load_circuit(ss.str(), n);
}

inline std::string save_circuit(const Circuit& c) {
  std::ostringstream out;
  out << "init " << to_string(c.initial_state()) << '\n';
  for (const auto& l : c.layers()) {
    switch (l.kind) {
      case LayerKind::kXRotation:
      case LayerKind::kZRotation:
        out << (l.kind == LayerKind::kXRotation ? "xrot" : "zrot");
        for (int v : l.mask.vertices()) out << ' ' << v;
        out << '\n';
        break;
      case LayerKind::kIsing: out << "ising\n"; break;
      case LayerKind::kXLocal: out << "xlocal\n"; break;
      case LayerKind::kTransverseX: out << "xmix\n"; break;
      case LayerKind::kZField: out << "zsum\n"; break;
    }
  }
  return out.str();
}

namespace detail {

/// Applies `layer` with parameters starting at theta[slot]; `sign` = -1
/// applies the inverse.
inline void apply_layer(StateVector& s, const Layer& layer, std::span<const double> theta, std::size_t slot,
                        const IsingDiagonal& diag, double sign = 1.0) {
  switch (layer.kind) {
    case LayerKind::kXRotation: apply_x_rotation(s, layer.mask, sign * theta[slot]); break;
    case LayerKind::kZRotation: apply_z_rotation(s, layer.mask, sign * theta[slot]); break;
    case LayerKind::kIsing: apply_ising_evolution(s, diag, sign * theta[slot]); break;
    case LayerKind::kXLocal:
      for (int v = 1; v <= s.num_qubits(); ++v) {
        apply_x_rotation(s, VertexSubset::of({v}), sign * theta[slot + static_cast<std::size_t>(v - 1)]);
      }
      break;
    case LayerKind::kTransverseX: apply_transverse_x(s, sign * theta[slot]); break;
    case LayerKind::kZField: apply_z_field(s, sign * theta[slot]); break;
  }
}

/// Im <lam| X_mask |psi>
inline double im_x_overlap(std::span<const Amplitude> lam, std::span<const Amplitude> psi, std::uint64_t m) {
  double acc = 0.0;
  for (std::uint64_t x = 0; x < psi.size(); ++x) {
    const Amplitude& l = lam[x];
    const Amplitude& p = psi[x ^ m];
    acc += l.real() * p.imag() - l.imag() * p.real();
  }
  return acc;
}

/// Im <lam| D |psi> for a real diagonal D.
template <class Eigenvalue>
double im_diag_overlap(std::span<const Amplitude> lam, std::span<const Amplitude> psi, Eigenvalue&& d) {
  double acc = 0.0;
  for (std::uint64_t x = 0; x < psi.size(); ++x) {
    const Amplitude& l = lam[x];
    const Amplitude& p = psi[x];
    acc += d(x) * (l.real() * p.imag() - l.imag() * p.real());
  }
  return acc;
}

}  // namespace detail

struct CircuitRun {
  StateVector state;
  double value = 0.0;
};

/// Evaluates circuits against one graph, reusing the Ising diagonal.
class CircuitSimulator {
 public:
  CircuitSimulator(Circuit circuit, const Graph& g, int qubit_limit = kDefaultQubitLimit)
      : circuit_(std::move(circuit)), diag_(g, qubit_limit), qubit_limit_(qubit_limit) {
    if (g.n() != circuit_.num_qubits()) throw Error("circuit and graph disagree on n");
  }

  const Circuit& circuit() const noexcept { return circuit_; }
  const IsingDiagonal& diagonal() const noexcept { return diag_; }
  std::size_t num_params() const noexcept { return circuit_.num_params(); }

  StateVector state(std::span<const double> theta) const {
    check(theta);
    StateVector s = init_state(circuit_.num_qubits(), circuit_.initial_state(), qubit_limit_);
    std::size_t slot = 0;
    for (const auto& l : circuit_.layers()) {
      detail::apply_layer(s, l, theta, slot, diag_);
      slot += circuit_.slots(l);
    }
    return s;
  }

  double value(std::span<const double> theta) const { return expectation(state(theta), diag_); }

  /// Objective and exact gradient by one forward pass and one backward sweep
  /// that un-applies each layer to both the state and the costate H_p|psi>.
  double value_and_gradient(std::span<const double> theta, std::span<double> grad) const {
    if (grad.size() != circuit_.num_params()) throw Error("gradient buffer has wrong length");
    StateVector psi = state(theta);
    const double value = expectation(psi, diag_);
    StateVector lam = psi;
    {
      auto la = lam.amplitudes();
      for (std::size_t x = 0; x < la.size(); ++x) la[x] *= diag_[x];
    }
    const int n = circuit_.num_qubits();
    std::size_t slot = circuit_.num_params();
    for (auto it = circuit_.layers().rbegin(); it != circuit_.layers().rend(); ++it) {
      const Layer& l = *it;
      slot -= circuit_.slots(l);
      const auto la = lam.amplitudes();
      const auto ps = psi.amplitudes();
      switch (l.kind) {
        case LayerKind::kXRotation: grad[slot] = 2.0 * detail::im_x_overlap(la, ps, l.mask.bits()); break;
        case LayerKind::kZRotation: {
          const std::uint64_t m = l.mask.bits();
          grad[slot] = 2.0 * detail::im_diag_overlap(la, ps, [m](std::uint64_t x) { return detail::z_parity(x, m); });
          break;
        }
        case LayerKind::kIsing:
          grad[slot] = 2.0 * detail::im_diag_overlap(la, ps, [this](std::uint64_t x) { return diag_[x]; });
          break;
        case LayerKind::kXLocal:
          for (int v = 1; v <= n; ++v) {
            grad[slot + static_cast<std::size_t>(v - 1)] =
                2.0 * detail::im_x_overlap(la, ps, std::uint64_t{1} << (v - 1));
          }
          break;
        case LayerKind::kTransverseX: {
          double acc = 0.0;
          for (int v = 1; v <= n; ++v) acc += detail::im_x_overlap(la, ps, std::uint64_t{1} << (v - 1));
          grad[slot] = 2.0 * acc;
          break;
        }
        case LayerKind::kZField:
          grad[slot] = 2.0 * detail::im_diag_overlap(la, ps, [n](std::uint64_t x) { return detail::z_field(x, n); });
          break;
      }
      detail::apply_layer(psi, l, theta, slot, diag_, -1.0);
      detail::apply_layer(lam, l, theta, slot, diag_, -1.0);
    }
    return value;
  }

  std::vector<double> gradient(std::span<const double> theta) const {
    std::vector<double> g(circuit_.num_params());
    value_and_gradient(theta, g);
    return g;
  }

 private:
  void check(std::span<const double> theta) const {
    if (theta.size() != circuit_.num_params()) {
      throw Error("parameter vector has " + std::to_string(theta.size()) + " entries, circuit has " +
                  std::to_string(circuit_.num_params()));
    }
  }

  Circuit circuit_;
  IsingDiagonal diag_;
  int qubit_limit_;
};

/// Applies the circuit to its initial state and measures H_p.
inline CircuitRun run_circuit(const Circuit& circ, std::span<const double> theta, const Graph& g) {
  CircuitSimulator sim(circ, g);
  CircuitRun r{sim.state(theta), 0.0};
  r.value = expectation(r.state, sim.diagonal());
  return r;
}

/// Adjoint-mode gradient of <H_p>.
inline std::vector<double> reverse_gradient(const Circuit& circ, std::span<const double> theta, const Graph& g) {
  return CircuitSimulator(circ, g).gradient(theta);
}

struct SampleResult {
  Cut best;
  double best_value = 0.0;
  std::map<std::uint64_t, std::size_t> counts;  ///< basis index -> hits
};

/// Draws `shots` computational-basis samples with probability |a_x|^2 and
/// keeps the sampled cut of largest value.
inline SampleResult sample_cuts(const StateVector& state, const Graph& g, std::size_t shots, std::uint64_t seed) {
  if (shots < 1) throw Error("sample_cuts: shots must be >= 1");
  const auto amps = state.amplitudes();
  std::vector<double> cdf(amps.size());
  double acc = 0.0;
  for (std::size_t x = 0; x < amps.size(); ++x) {
    acc += std::norm(amps[x]);
    cdf[x] = acc;
  }
  Rng rng(seed);
  SampleResult out;
  bool first = true;
  for (std::size_t i = 0; i < shots; ++i) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto x = static_cast<std::uint64_t>(it - cdf.begin());
    ++out.counts[x];
    const double v = cut_value(g, VertexSubset(x));
    if (first || v > out.best_value) {
      out.best_value = v;
      out.best = Cut::canonical(VertexSubset(x), g.n());
      first = false;
    }
  }
  return out;
}

}  // namespace maxland
