// maxland: command-line front end for the maxland headers.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maxland/maxland.hpp"

namespace {

using namespace maxland;

struct ModelArgs {
  std::string graph;
  std::string ansatz;
  std::string circuit;
  int depth = 0;
  std::string theta;
};

void add_model_flags(CLI::App* cmd, ModelArgs& a, bool allow_circuit) {
  cmd->add_option("--graph", a.graph, "graph file")->required()->check(CLI::ExistingFile);
  auto* ans = cmd->add_option("--ansatz", a.ansatz, "ansatz file")->check(CLI::ExistingFile);
  auto* dep = cmd->add_option("--depth", a.depth, "all subsets up to this k-body depth")->check(CLI::PositiveNumber);
  ans->excludes(dep);
  if (allow_circuit) {
    auto* circ = cmd->add_option("--circuit", a.circuit, "circuit file")->check(CLI::ExistingFile);
    circ->excludes(ans)->excludes(dep);
  }
}

SimpleAnsatz resolve_ansatz(const ModelArgs& a, int n) {
  if (!a.ansatz.empty()) return load_ansatz_file(a.ansatz, n);
  if (a.depth > 0) {
    if (a.depth > n) throw Error("--depth exceeds graph order");
    return SimpleAnsatz::up_to_depth(n, a.depth);
  }
  return SimpleAnsatz::classical(n);
}

Circuit resolve_circuit(const ModelArgs& a, int n) {
  if (!a.circuit.empty()) return load_circuit_file(a.circuit, n);
  return circuit_from_ansatz(resolve_ansatz(a, n), n);
}

/// Comma/whitespace separated angles, or "@file".
std::vector<double> parse_theta(const std::string& spec, std::size_t m) {
  std::string text = spec;
  if (!text.empty() && text[0] == '@') {
    std::ifstream f(text.substr(1));
    if (!f) throw Error("cannot open theta file: " + text.substr(1));
    std::ostringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  for (char& c : text) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(text);
  std::vector<double> out;
  for (std::string tok; in >> tok;) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw Error("");
    } catch (const std::exception&) {
      throw Error("bad angle '" + tok + "'");
    }
  }
  if (out.size() != m) {
    throw Error("expected " + std::to_string(m) + " angles, got " + std::to_string(out.size()));
  }
  return out;
}

void print_vector(std::ostream& os, const std::string& key, std::span<const double> v) {
  os << key << ':';
  for (double x : v) os << ' ' << x;
  os << '\n';
}

VertexSubset parse_vertices(const std::string& s, int n) {
  std::string text = s;
  for (char& c : text) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(text);
  VertexSubset out;
  for (int v; in >> v;) {
    if (v < 1 || v > n) throw Error("vertex out of range: " + std::to_string(v));
    out.insert(v);
  }
  if (!in.eof()) throw Error("bad vertex list '" + s + "'");
  return out;
}

std::ostream& out_stream(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw Error("cannot open output file: " + path);
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MaxCut landscapes of commuting X-string ansatze"};
  app.require_subcommand(1);
  std::cout << std::setprecision(17);

  // gen
  int gen_n = 8;
  double gen_wmin = 0.0;
  double gen_wmax = 5.0;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "random complete graph with uniform weights");
  gen->add_option("--n", gen_n, "vertex count")->required();
  gen->add_option("--wmin", gen_wmin, "lower weight bound");
  gen->add_option("--wmax", gen_wmax, "upper weight bound");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // exact
  std::string exact_graph;
  auto* exact = app.add_subcommand("exact", "exhaustive maximum cut");
  exact->add_option("--graph", exact_graph, "graph file")->required()->check(CLI::ExistingFile);

  // eval / grad / hess
  ModelArgs eval_args;
  auto* eval = app.add_subcommand("eval", "objective <H_p> at theta");
  add_model_flags(eval, eval_args, true);
  eval->add_option("--theta", eval_args.theta, "angles, comma separated or @file")->required();

  ModelArgs grad_args;
  auto* grad = app.add_subcommand("grad", "gradient at theta");
  add_model_flags(grad, grad_args, true);
  grad->add_option("--theta", grad_args.theta, "angles, comma separated or @file")->required();

  ModelArgs hess_args;
  bool hess_classify = false;
  auto* hess = app.add_subcommand("hess", "Hessian of a simple ansatz at theta");
  add_model_flags(hess, hess_args, false);
  hess->add_option("--theta", hess_args.theta, "angles, comma separated or @file")->required();
  hess->add_flag("--classify", hess_classify, "classify theta as a critical point");

  // optimize
  ModelArgs opt_args;
  std::uint64_t opt_seed = 1;
  BfgsConfig opt_cfg;
  auto* opt = app.add_subcommand("optimize", "BFGS from a random start");
  add_model_flags(opt, opt_args, true);
  opt->add_option("--seed", opt_seed, "seed of the initial angles");
  opt->add_option("--grad-tol", opt_cfg.grad_tol, "gradient inf-norm tolerance");
  opt->add_option("--max-iters", opt_cfg.max_iters, "iteration cap");
  opt->add_option("--c1", opt_cfg.wolfe_c1, "sufficient-decrease constant");
  opt->add_option("--c2", opt_cfg.wolfe_c2, "curvature constant");

  // flip
  ModelArgs flip_args;
  std::string flip_start;
  std::string flip_policy = "greedy";
  std::uint64_t flip_seed = 1;
  auto* flip = app.add_subcommand("flip", "local search over ansatz flips");
  add_model_flags(flip, flip_args, false);
  flip->add_option("--start", flip_start, "start cut as vertex list (default empty)");
  flip->add_option("--policy", flip_policy, "greedy | random")->check(CLI::IsMember({"greedy", "random"}));
  flip->add_option("--seed", flip_seed, "seed for the random policy");

  // scan-cuts
  ModelArgs scan_args;
  auto* scan = app.add_subcommand("scan-cuts", "cuts satisfying the local-minimum inequalities");
  add_model_flags(scan, scan_args, false);

  // verify-trapfree
  std::string vt_graph;
  auto* vt = app.add_subcommand("verify-trapfree", "check the full-subset ansatz has no trap cuts");
  vt->add_option("--graph", vt_graph, "graph file")->required()->check(CLI::ExistingFile);

  // variance
  ModelArgs var_args;
  std::size_t var_k = 0;
  std::size_t var_samples = 100000;
  std::uint64_t var_seed = 1;
  auto* var = app.add_subcommand("variance", "gradient variance over uniform angles");
  add_model_flags(var, var_args, true);
  var->add_option("--k", var_k, "parameter index (0-based)");
  var->add_option("--samples", var_samples, "Monte Carlo samples")->check(CLI::Range(100, 100000000));
  var->add_option("--seed", var_seed, "seed");

  // experiment
  std::string exp_config;
  std::optional<int> exp_n;
  std::optional<std::size_t> exp_realizations;
  std::optional<std::uint64_t> exp_seed;
  std::vector<int> exp_depths;
  std::vector<std::string> exp_variants;
  std::optional<unsigned> exp_threads;
  bool exp_no_timing = false;
  std::string exp_out;
  bool exp_summary = false;
  std::string exp_kind;
  auto* exp = app.add_subcommand("experiment", "seeded batch of optimizations, CSV output");
  exp->add_option("kind", exp_kind, "kbody | xz | qaoa")->required()->check(CLI::IsMember({"kbody", "xz", "qaoa"}));
  exp->add_option("--json-config", exp_config, "JSON config file")->check(CLI::ExistingFile);
  exp->add_option("--n", exp_n, "vertex count");
  exp->add_option("--realizations", exp_realizations, "graphs per grid point");
  exp->add_option("--seed", exp_seed, "master seed");
  exp->add_option("--depth", exp_depths, "grid values (depth or layer count), repeatable");
  exp->add_option("--variant", exp_variants, "variants to run, repeatable");
  exp->add_option("--threads", exp_threads, "worker threads (0 = all cores)");
  exp->add_flag("--no-timing", exp_no_timing, "write runtime_ms as 0 for reproducible output");
  exp->add_option("--out", exp_out, "CSV output file (default stdout)");
  exp->add_flag("--summary", exp_summary, "print per-group means to stderr");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const Graph g = random_complete_graph(gen_n, gen_wmin, gen_wmax, gen_seed);
      std::ofstream f;
      out_stream(gen_out, f) << save_graph(g);
    } else if (exact->parsed()) {
      const Graph g = load_graph_file(exact_graph);
      const auto r = max_cut_exact(g);
      std::cout << "max_cut: " << r.value << '\n';
      std::cout << "total_weight: " << g.total_weight() << '\n';
      for (const auto& c : r.argmax) std::cout << "argmax: " << c.members.to_string() << '\n';
    } else if (eval->parsed() || grad->parsed()) {
      const ModelArgs& a = eval->parsed() ? eval_args : grad_args;
      const Graph g = load_graph_file(a.graph);
      const CircuitSimulator sim(resolve_circuit(a, g.n()), g);
      const auto theta = parse_theta(a.theta, sim.num_params());
      std::vector<double> gr(sim.num_params());
      const double j = sim.value_and_gradient(theta, gr);
      std::cout << "objective: " << j << '\n';
      if (grad->parsed()) print_vector(std::cout, "gradient", gr);
    } else if (hess->parsed()) {
      const Graph g = load_graph_file(hess_args.graph);
      const EdgeExpansion e = build_expansion(g, resolve_ansatz(hess_args, g.n()));
      const auto theta = parse_theta(hess_args.theta, e.num_params());
      const Eigen::MatrixXd h = hessian(e, theta);
      for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = 0; j < h.cols(); ++j) std::cout << (j ? " " : "") << h(i, j);
        std::cout << '\n';
      }
      if (hess_classify) {
        const auto r = classify_critical_point(e, theta);
        std::cout << "classification: " << to_string(r.classification) << '\n';
        print_vector(std::cout, "spectrum", r.hessian_spectrum);
        if (r.nearest_eigenstate) {
          std::cout << "nearest_eigenstate: " << r.nearest_eigenstate->members.to_string()
                    << " distance " << r.eigenstate_distance << '\n';
        }
      }
    } else if (opt->parsed()) {
      const Graph g = load_graph_file(opt_args.graph);
      const CircuitSimulator sim(resolve_circuit(opt_args, g.n()), g);
      const ObjectiveFn fn = [&sim](std::span<const double> x, std::span<double> gr) {
        return sim.value_and_gradient(x, gr);
      };
      const auto r = minimize(fn, random_init(sim.num_params(), opt_seed), opt_cfg);
      const double mc = max_cut_exact(g).value;
      std::cout << "objective: " << r.value << '\n';
      std::cout << "alpha_continuous: " << ((g.total_weight() - r.value) / 2.0) / mc << '\n';
      std::cout << "iterations: " << r.iterations << '\n';
      std::cout << "termination: " << to_string(r.termination) << '\n';
      std::cout << "grad_norm: " << r.grad_norm << '\n';
      print_vector(std::cout, "theta", wrap_angles(r.theta));
    } else if (flip->parsed()) {
      const Graph g = load_graph_file(flip_args.graph);
      const SimpleAnsatz ans = resolve_ansatz(flip_args, g.n());
      const auto policy = flip_policy == "greedy" ? FlipPolicy::kGreedy : FlipPolicy::kRandomImproving;
      const auto r = flip_algorithm(g, ans, parse_vertices(flip_start, g.n()), policy, flip_seed);
      for (const auto& s : r.trace) {
        std::cout << "step " << s.iteration << ": element " << s.element << " " << ans[s.element].to_string()
                  << " -> " << s.cut.to_string() << " value " << s.value << '\n';
      }
      std::cout << "fixed_point: " << r.fixed_point.members.to_string() << " value " << r.value << '\n';
    } else if (scan->parsed()) {
      const Graph g = load_graph_file(scan_args.graph);
      const SimpleAnsatz ans = resolve_ansatz(scan_args, g.n());
      const auto mc = max_cut_exact(g);
      for (const auto& c : enumerate_inequality_cuts(g, ans)) {
        const double v = cut_value(g, c);
        std::cout << c.members.to_string() << ' ' << v << (v == mc.value ? " max" : " trap") << '\n';
      }
    } else if (vt->parsed()) {
      const Graph g = load_graph_file(vt_graph);
      const auto r = verify_trap_free_full_ansatz(g);
      std::cout << "trap_free: " << (r.trap_free ? "true" : "false") << '\n';
      if (r.witness) std::cout << "witness: " << r.witness->members.to_string() << '\n';
      return r.trap_free ? 0 : 1;
    } else if (var->parsed()) {
      const Graph g = load_graph_file(var_args.graph);
      const Circuit circ = resolve_circuit(var_args, g.n());
      if (circ.is_simple()) {
        const EdgeExpansion e = build_expansion(g, ansatz_from_circuit(circ));
        const auto r = variance_compare(e, var_k, var_samples, var_seed);
        std::cout << "analytic: " << *r.analytic << '\n';
        std::cout << "monte_carlo: " << *r.monte_carlo << " +- " << *r.mc_stderr << '\n';
        std::cout << "mean: " << *r.mc_mean << " +- " << *r.mc_mean_stderr << '\n';
        std::cout << "discrepancy: " << (*r.discrepancy() ? "true" : "false") << '\n';
      } else {
        const CircuitSimulator sim(circ, g);
        const auto r = variance_monte_carlo(sim, var_k, var_samples, var_seed);
        std::cout << "monte_carlo (empirical): " << *r.monte_carlo << " +- " << *r.mc_stderr << '\n';
        std::cout << "mean: " << *r.mc_mean << " +- " << *r.mc_mean_stderr << '\n';
      }
    } else if (exp->parsed()) {
      ExperimentConfig cfg;
      if (!exp_config.empty()) {
        std::ifstream f(exp_config);
        std::ostringstream ss;
        ss << f.rdbuf();
        cfg = parse_experiment_config(ss.str());
      }
      cfg.kind = parse_experiment_kind(exp_kind);
      if (exp_n) cfg.n = *exp_n;
      if (exp_realizations) cfg.realizations = *exp_realizations;
      if (exp_seed) cfg.master_seed = *exp_seed;
      if (!exp_depths.empty()) {
        cfg.depths = exp_depths;
        cfg.qaoa_layers = exp_depths;
        cfg.xlocal_layers = exp_depths;
      }
      if (!exp_variants.empty()) cfg.variants = exp_variants;
      if (exp_threads) cfg.threads = *exp_threads;
      if (exp_no_timing) cfg.record_timing = false;
      const auto records = run_experiment(cfg);
      std::ofstream f;
      emit_csv(records, out_stream(exp_out, f));
      if (exp_summary) {
        std::cerr << "experiment,n,depth,m_params,count,mean_alpha,std_alpha,mean_alpha_rounded\n";
        for (const auto& s : aggregate(records)) {
          std::cerr << s.experiment << ',' << s.n << ',' << s.depth << ',' << s.m_params << ',' << s.count << ','
                    << s.mean_alpha << ',' << s.std_alpha << ',' << s.mean_alpha_rounded << '\n';
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
