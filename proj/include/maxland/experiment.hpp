#pragma once

// Seeded batches of optimization runs on random complete graphs, CSV output
// and aggregation.
//
// Seeding: realization r uses graph seed derive_seed(master_seed, r), so all
// variants and depths of one realization share a graph. A run's own seed
// (initial angles, sampling) is derive_seed(graph_seed, run_tag(variant,
// depth)); that run seed is what the CSV records.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maxland/analytic.hpp"
#include "maxland/error.hpp"
#include "maxland/graph.hpp"
#include "maxland/landscape.hpp"
#include "maxland/optimize.hpp"
#include "maxland/parallel.hpp"
#include "maxland/random.hpp"
#include "maxland/statevector.hpp"

namespace maxland {

enum class ExperimentKind { kKBody, kXZ, kQaoa };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kKBody: return "kbody";
    case ExperimentKind::kXZ: return "xz";
    case ExperimentKind::kQaoa: return "qaoa";
  }
  return "unknown";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
  if (s == "kbody") return ExperimentKind::kKBody;
  if (s == "xz") return ExperimentKind::kXZ;
  if (s == "qaoa") return ExperimentKind::kQaoa;
  throw Error("unknown experiment kind '" + std::string(s) + "'");
}

/// Circuit families. "Depth" is the k-body depth for the X-string families
/// and the layer count p for the QAOA families.
namespace variant {
inline constexpr std::string_view kKBody = "kbody";            // simple ansatz, all subsets up to depth
inline constexpr std::string_view kX = "x";                    // same circuit, reported as a baseline
inline constexpr std::string_view kXZSubset = "xz-a";          // X_S then Z_S
inline constexpr std::string_view kXZGlobal = "xz-b";          // X_S then sum_i Z_i
inline constexpr std::string_view kQaoa = "qaoa";              // |+>, (H_p, sum X) x p
inline constexpr std::string_view kQaoaXLocalPlus = "qaoa-xlocal-plus";
inline constexpr std::string_view kQaoaXLocalZero = "qaoa-xlocal-zero";
}  // namespace variant

inline bool is_layered_variant(std::string_view v) {
  return v == variant::kQaoa || v == variant::kQaoaXLocalPlus || v == variant::kQaoaXLocalZero;
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kKBody;
  int n = 8;
  std::size_t realizations = 100;
  std::uint64_t master_seed = 1;
  double w_min = 0.0;
  double w_max = 5.0;
  /// Variants to run; empty selects the kind's defaults.
  std::vector<std::string> variants;
  /// k-body depths for X-string families; empty selects 1..n-1.
  std::vector<int> depths;
  /// Layer counts for standard QAOA; empty selects 1..30.
  std::vector<int> qaoa_layers;
  /// Layer counts for the x-local QAOA families; empty selects 1..7.
  std::vector<int> xlocal_layers;
  BfgsConfig bfgs;
  std::size_t shots = 2048;
  /// Use the kernel expansion when its work estimate is at most this
  /// multiple of the statevector cost.
  double analytic_cost_ratio = 1.0;
  unsigned threads = 0;
  /// When false, runtime_ms is written as 0 so reruns are byte-identical.
  bool record_timing = true;

  std::vector<std::string> effective_variants() const {
    if (!variants.empty()) return variants;
    switch (kind) {
      case ExperimentKind::kKBody: return {std::string(variant::kKBody)};
      case ExperimentKind::kXZ:
        return {std::string(variant::kXZSubset), std::string(variant::kXZGlobal), std::string(variant::kX)};
      case ExperimentKind::kQaoa:
        return {std::string(variant::kQaoa), std::string(variant::kQaoaXLocalPlus),
                std::string(variant::kQaoaXLocalZero), std::string(variant::kX), std::string(variant::kXZSubset)};
    }
    return {};
  }

  std::vector<int> effective_depths() const {
    if (!depths.empty()) return depths;
    std::vector<int> d;
    const int top = kind == ExperimentKind::kQaoa ? std::min(3, n - 1) : n - 1;
    for (int k = 1; k <= top; ++k) d.push_back(k);
    return d;
  }

  std::vector<int> grid_for(std::string_view v) const {
    if (v == variant::kQaoa) {
      if (!qaoa_layers.empty()) return qaoa_layers;
      std::vector<int> p;
      for (int i = 1; i <= 30; ++i) p.push_back(i);
      return p;
    }
    if (v == variant::kQaoaXLocalPlus || v == variant::kQaoaXLocalZero) {
      if (!xlocal_layers.empty()) return xlocal_layers;
      return {1, 2, 3, 4, 5, 6, 7};
    }
    return effective_depths();
  }

  void validate() const {
    if (n < 2 || n > kDefaultQubitLimit) throw Error("experiment n must lie in [2, 26]");
    if (realizations < 1) throw Error("experiment needs at least one realization");
    if (w_min < 0.0 || w_min > w_max) throw Error("weight range must satisfy 0 <= w_min <= w_max");
    bfgs.validate();
    for (const auto& v : effective_variants()) {
      const bool known = v == variant::kKBody || v == variant::kX || v == variant::kXZSubset ||
                         v == variant::kXZGlobal || is_layered_variant(v);
      if (!known) throw Error("unknown variant '" + v + "'");
      for (int d : grid_for(v)) {
        if (is_layered_variant(v)) {
          if (d < 1) throw Error("QAOA layer counts must be >= 1");
        } else if (d < 1 || d > n - 1) {
          throw Error("k-body depth " + std::to_string(d) + " outside [1, n-1]");
        }
      }
    }
    if (shots < 1) throw Error("shots must be >= 1");
  }
};

/// Reads the JSON experiment config (schema in README.md). Unknown keys are
/// rejected so typos do not silently fall back to defaults.
inline ExperimentConfig parse_experiment_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error("config: top level must be an object");
  ExperimentConfig c;
  static const std::vector<std::string> top_keys = {"kind", "n", "realizations", "seed", "weights", "variants",
                                                    "depths", "qaoa_layers", "xlocal_layers", "bfgs", "shots",
                                                    "threads", "record_timing", "analytic_cost_ratio"};
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find(top_keys.begin(), top_keys.end(), it.key()) == top_keys.end()) {
        throw Error("config: unknown key '" + it.key() + "'");
      }
    }
    if (j.contains("kind")) c.kind = parse_experiment_kind(j.at("kind").get<std::string>());
    if (j.contains("n")) c.n = j.at("n").get<int>();
    if (j.contains("realizations")) c.realizations = j.at("realizations").get<std::size_t>();
    if (j.contains("seed")) c.master_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("weights")) {
      const auto w = j.at("weights").get<std::vector<double>>();
      if (w.size() != 2) throw Error("config: weights must be [w_min, w_max]");
      c.w_min = w[0];
      c.w_max = w[1];
    }
    if (j.contains("variants")) c.variants = j.at("variants").get<std::vector<std::string>>();
    if (j.contains("depths")) c.depths = j.at("depths").get<std::vector<int>>();
    if (j.contains("qaoa_layers")) c.qaoa_layers = j.at("qaoa_layers").get<std::vector<int>>();
    if (j.contains("xlocal_layers")) c.xlocal_layers = j.at("xlocal_layers").get<std::vector<int>>();
    if (j.contains("shots")) c.shots = j.at("shots").get<std::size_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("record_timing")) c.record_timing = j.at("record_timing").get<bool>();
    if (j.contains("analytic_cost_ratio")) c.analytic_cost_ratio = j.at("analytic_cost_ratio").get<double>();
    if (j.contains("bfgs")) {
      const auto& b = j.at("bfgs");
      for (auto it = b.begin(); it != b.end(); ++it) {
        const auto& k = it.key();
        if (k == "grad_tol") c.bfgs.grad_tol = it->get<double>();
        else if (k == "max_iters") c.bfgs.max_iters = it->get<std::size_t>();
        else if (k == "c1") c.bfgs.wolfe_c1 = it->get<double>();
        else if (k == "c2") c.bfgs.wolfe_c2 = it->get<double>();
        else if (k == "max_line_search_steps") c.bfgs.max_line_search_steps = it->get<std::size_t>();
        else throw Error("config: unknown bfgs key '" + k + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

struct RunRecord {
  std::string experiment;
  int n = 0;
  int depth = 0;
  std::size_t m_params = 0;
  std::size_t realization = 0;
  std::uint64_t seed = 0;
  double alpha_continuous = 0.0;
  double alpha_rounded = 0.0;
  std::size_t iterations = 0;
  std::string termination;
  double grad_norm = 0.0;
  double runtime_ms = 0.0;
  /// In-memory only: final objective and parameters for replay.
  double value = 0.0;
  std::vector<double> theta;
};

/// Tag mixed into a run seed; FNV-1a over the variant name, then the depth.
inline std::uint64_t run_tag(std::string_view v, int depth) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char ch : v) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  return splitmix64(h ^ static_cast<std::uint64_t>(depth));
}

inline std::uint64_t graph_seed(std::uint64_t master_seed, std::size_t realization) {
  return derive_seed(master_seed, realization);
}

/// Circuit for (variant, depth) on n qubits.
inline Circuit build_variant_circuit(std::string_view v, int n, int depth) {
  if (v == variant::kKBody || v == variant::kX) return circuit_from_ansatz(SimpleAnsatz::up_to_depth(n, depth), n);
  if (v == variant::kXZSubset) return xz_circuit(SimpleAnsatz::up_to_depth(n, depth), n, XZVariant::kSubsetZ);
  if (v == variant::kXZGlobal) return xz_circuit(SimpleAnsatz::up_to_depth(n, depth), n, XZVariant::kGlobalZ);
  if (v == variant::kQaoa) return qaoa_circuit(n, depth);
  if (v == variant::kQaoaXLocalPlus) return qaoa_xlocal_circuit(n, depth, InitialState::kPlus);
  if (v == variant::kQaoaXLocalZero) return qaoa_xlocal_circuit(n, depth, InitialState::kZeros);
  throw Error("unknown variant '" + std::string(v) + "'");
}

struct RunSpec {
  std::string variant;
  int depth = 0;
  std::size_t realization = 0;
};

/// One optimization: random start, BFGS, then both approximation ratios.
/// Simple circuits go through the kernel expansion when it is cheaper than
/// simulation and are rounded with round_to_cut; other circuits are rounded
/// by the best of `shots` samples.
inline RunRecord run_single(const ExperimentConfig& cfg, const RunSpec& spec, const Graph& g, double max_cut) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = derive_seed(graph_seed(cfg.master_seed, spec.realization), run_tag(spec.variant, spec.depth));
  const Circuit circ = build_variant_circuit(spec.variant, g.n(), spec.depth);
  const CircuitSimulator sim(circ, g);
  const std::size_t m = circ.num_params();

  std::optional<EdgeExpansion> exp;
  std::optional<SimpleAnsatz> ansatz;
  if (circ.is_simple()) {
    ansatz = ansatz_from_circuit(circ);
    const double sv_cost = static_cast<double>(m) * static_cast<double>(std::size_t{1} << g.n());
    try {
      EdgeExpansion e = build_expansion(g, *ansatz, 16);
      if (static_cast<double>(e.total_work()) <= cfg.analytic_cost_ratio * sv_cost) exp = std::move(e);
    } catch (const LimitError&) {
    }
  }

  ObjectiveFn fn;
  if (exp) {
    fn = [&exp](std::span<const double> x, std::span<double> grad) {
      const auto gv = gradient(*exp, x);
      std::copy(gv.begin(), gv.end(), grad.begin());
      return objective(*exp, x);
    };
  } else {
    fn = [&sim](std::span<const double> x, std::span<double> grad) { return sim.value_and_gradient(x, grad); };
  }

  const auto theta0 = random_init(m, seed);
  const OptResult opt = minimize(fn, theta0, cfg.bfgs);

  RunRecord r;
  r.experiment = spec.variant;
  r.n = g.n();
  r.depth = spec.depth;
  r.m_params = m;
  r.realization = spec.realization;
  r.seed = seed;
  r.iterations = opt.iterations;
  r.termination = to_string(opt.termination);
  r.grad_norm = opt.grad_norm;
  r.value = opt.value;
  r.theta = opt.theta;
  const double w = g.total_weight();
  r.alpha_continuous = max_cut > 0.0 ? ((w - opt.value) / 2.0) / max_cut : 1.0;

  double rounded_value = 0.0;
  if (ansatz) {
    if (exp) {
      rounded_value = round_to_cut(*exp, opt.theta).cut_value;
    } else {
      rounded_value =
          round_to_cut(g, *ansatz, opt.theta, [&sim](std::span<const double> t) { return sim.value(t); }).cut_value;
    }
  } else {
    rounded_value = sample_cuts(sim.state(opt.theta), g, cfg.shots, derive_seed(seed, 1)).best_value;
  }
  r.alpha_rounded = max_cut > 0.0 ? rounded_value / max_cut : 1.0;
  const auto t1 = std::chrono::steady_clock::now();
  r.runtime_ms = cfg.record_timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
  return r;
}

/// Runs every (variant, depth, realization) of the config; output ordered by
/// variant (config order), depth (grid order), realization.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Graph> graphs;
  std::vector<double> max_cuts;
  for (std::size_t r = 0; r < cfg.realizations; ++r) {
    graphs.push_back(random_complete_graph(cfg.n, cfg.w_min, cfg.w_max, graph_seed(cfg.master_seed, r)));
    max_cuts.push_back(max_cut_exact(graphs.back()).value);
  }
  std::vector<RunSpec> specs;
  for (const auto& v : cfg.effective_variants()) {
    for (int d : cfg.grid_for(v)) {
      for (std::size_t r = 0; r < cfg.realizations; ++r) specs.push_back({v, d, r});
    }
  }
  std::vector<RunRecord> out(specs.size());
  parallel_for(specs.size(), cfg.threads, [&](std::size_t i) {
    const auto& s = specs[i];
    out[i] = run_single(cfg, s, graphs[s.realization], max_cuts[s.realization]);
  });
  return out;
}

inline std::vector<RunRecord> run_kbody_sweep(ExperimentConfig cfg) {
  cfg.kind = ExperimentKind::kKBody;
  return run_experiment(cfg);
}

inline std::vector<RunRecord> run_xz_sweep(ExperimentConfig cfg) {
  cfg.kind = ExperimentKind::kXZ;
  return run_experiment(cfg);
}

inline std::vector<RunRecord> run_qaoa_compare(ExperimentConfig cfg) {
  cfg.kind = ExperimentKind::kQaoa;
  return run_experiment(cfg);
}

inline constexpr std::string_view kCsvHeader =
    "experiment,n,depth,m_params,realization,seed,alpha_continuous,alpha_rounded,iterations,termination,grad_norm,"
    "runtime_ms";

/// CSV text, one row per record, reals at 17 significant digits.
inline std::string format_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.experiment << ',' << r.n << ',' << r.depth << ',' << r.m_params << ',' << r.realization << ','
        << r.seed << ',' << r.alpha_continuous << ',' << r.alpha_rounded << ',' << r.iterations << ','
        << r.termination << ',' << r.grad_norm << ',' << r.runtime_ms << '\n';
  }
  return out.str();
}

inline void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open output file: " + path);
  f << format_csv(records);
  if (!f) throw Error("failed writing output file: " + path);
}

inline void emit_csv(const std::vector<RunRecord>& records, std::ostream& out) { out << format_csv(records); }

/// Inverse of format_csv.
inline std::vector<RunRecord> parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError(1, "missing or unexpected CSV header");
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 12) throw ParseError(lineno, "expected 12 fields");
    try {
      RunRecord r;
      r.experiment = f[0];
      r.n = std::stoi(f[1]);
      r.depth = std::stoi(f[2]);
      r.m_params = std::stoull(f[3]);
      r.realization = std::stoull(f[4]);
      r.seed = std::stoull(f[5]);
      r.alpha_continuous = std::stod(f[6]);
      r.alpha_rounded = std::stod(f[7]);
      r.iterations = std::stoull(f[8]);
      r.termination = f[9];
      r.grad_norm = std::stod(f[10]);
      r.runtime_ms = std::stod(f[11]);
      out.push_back(std::move(r));
    } catch (const std::exception&) {
      throw ParseError(lineno, "malformed numeric field");
    }
  }
  return out;
}

struct GroupStats {
  std::string experiment;
  int n = 0;
  int depth = 0;
  std::size_t m_params = 0;
  double mean_alpha = 0.0;  ///< alpha_continuous
  double std_alpha = 0.0;   ///< population standard deviation
  double mean_alpha_rounded = 0.0;
  double std_alpha_rounded = 0.0;
  std::size_t count = 0;
};

/// Groups by (experiment, n, depth) in first-appearance order.
inline std::vector<GroupStats> aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) throw Error("aggregate: no records");
  std::vector<GroupStats> groups;
  std::vector<std::vector<const RunRecord*>> members;
  std::map<std::tuple<std::string, int, int>, std::size_t> index;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.experiment, r.n, r.depth);
    auto [it, fresh] = index.emplace(key, groups.size());
    if (fresh) {
      groups.push_back({r.experiment, r.n, r.depth, r.m_params});
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  auto mean_std = [](const std::vector<const RunRecord*>& rs, double RunRecord::*field) {
    double mean = 0.0;
    for (const auto* r : rs) mean += r->*field;
    mean /= static_cast<double>(rs.size());
    double var = 0.0;
    for (const auto* r : rs) var += (r->*field - mean) * (r->*field - mean);
    return std::make_pair(mean, std::sqrt(var / static_cast<double>(rs.size())));
  };
  for (std::size_t i = 0; i < groups.size(); ++i) {
    std::tie(groups[i].mean_alpha, groups[i].std_alpha) = mean_std(members[i], &RunRecord::alpha_continuous);
    std::tie(groups[i].mean_alpha_rounded, groups[i].std_alpha_rounded) =
        mean_std(members[i], &RunRecord::alpha_rounded);
    groups[i].count = members[i].size();
  }
  return groups;
}

/// Mean alpha_continuous of one group, or NaN if absent.
inline double group_mean(const std::vector<GroupStats>& groups, std::string_view experiment, int depth) {
  for (const auto& g : groups) {
    if (g.experiment == experiment && g.depth == depth) return g.mean_alpha;
  }
  return std::nan("");
}

}  // namespace maxland
