#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "maxland/analytic.hpp"
#include "maxland/statevector.hpp"
#include "support/oracle.hpp"

namespace {

using maxland::Amplitude;
using maxland::Circuit;
using maxland::Graph;
using maxland::InitialState;
using maxland::Layer;
using maxland::VertexSubset;

constexpr double kPi = std::numbers::pi;

Circuit mixed_circuit(int n, maxland::Rng& rng, InitialState init) {
  Circuit c(n, init);
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  auto mask = [&] {
    std::uint64_t b = 0;
    while (b == 0) b = rng() & full;
    return VertexSubset(b);
  };
  c.add(Layer::x_rotation(mask()));
  c.add(Layer::z_rotation(mask()));
  c.add(Layer::ising());
  c.add(Layer::x_local());
  c.add(Layer::transverse_x());
  c.add(Layer::z_field());
  c.add(Layer::x_rotation(mask()));
  c.add(Layer::ising());
  return c;
}

TEST(InitState, ZerosAndPlus) {
  const auto z = maxland::init_state(2, InitialState::kZeros);
  EXPECT_EQ(z[0], Amplitude(1.0, 0.0));
  EXPECT_EQ(z[3], Amplitude(0.0, 0.0));
  const auto p = maxland::init_state(2, InitialState::kPlus);
  for (std::size_t x = 0; x < 4; ++x) EXPECT_NEAR(p[x].real(), 0.5, 1e-15);
  EXPECT_NEAR(z.norm(), 1.0, 1e-15);
  EXPECT_NEAR(p.norm(), 1.0, 1e-15);
  EXPECT_THROW(maxland::init_state(30, InitialState::kZeros), maxland::LimitError);
}

TEST(XRotation, Examples) {
  auto s = maxland::init_state(1, InitialState::kZeros);
  maxland::apply_x_rotation(s, VertexSubset::of({1}), kPi / 2);
  EXPECT_NEAR(std::abs(s[0]), 0.0, 1e-15);
  EXPECT_NEAR(s[1].real(), 0.0, 1e-15);
  EXPECT_NEAR(s[1].imag(), -1.0, 1e-15);

  maxland::Rng rng(1);
  auto t = maxland::init_state(4, InitialState::kPlus);
  maxland::apply_z_rotation(t, VertexSubset::of({2}), 0.3);
  const auto before = t;
  maxland::apply_x_rotation(t, VertexSubset::of({1, 3}), 0.0);
  for (std::size_t x = 0; x < t.dim(); ++x) EXPECT_EQ(t[x], before[x]);

  auto a = before;
  auto b = before;
  maxland::apply_x_rotation(a, VertexSubset::of({2, 4}), 0.4);
  maxland::apply_x_rotation(a, VertexSubset::of({2, 4}), 0.7);
  maxland::apply_x_rotation(b, VertexSubset::of({2, 4}), 1.1);
  for (std::size_t x = 0; x < a.dim(); ++x) EXPECT_NEAR(std::abs(a[x] - b[x]), 0.0, 1e-14);

  maxland::apply_x_rotation(a, VertexSubset::of({3}), 0.9);
  maxland::apply_x_rotation(a, VertexSubset::of({3}), -0.9);
  maxland::apply_x_rotation(b, VertexSubset{VertexSubset::of({3})}, 0.0);
  for (std::size_t x = 0; x < a.dim(); ++x) EXPECT_NEAR(std::abs(a[x] - b[x]), 0.0, 1e-12);
  EXPECT_THROW(maxland::apply_x_rotation(a, VertexSubset{}, 0.1), maxland::Error);
  EXPECT_THROW(maxland::apply_x_rotation(a, VertexSubset::of({5}), 0.1), maxland::Error);
}

TEST(DiagonalLayers, PhasesAndInvariance) {
  const Graph g = maxland::random_complete_graph(4, 0.0, 5.0, 2);
  auto z = maxland::init_state(4, InitialState::kZeros);
  maxland::apply_z_rotation(z, VertexSubset::of({1, 2}), 0.3);
  EXPECT_NEAR(std::abs(z[0] - std::exp(Amplitude(0, -0.3))), 0.0, 1e-15);

  auto e = maxland::init_state(4, InitialState::kZeros);
  maxland::apply_ising_evolution(e, g, 0.2);
  EXPECT_NEAR(std::abs(e[0] - std::exp(Amplitude(0, -0.2 * g.total_weight()))), 0.0, 1e-14);

  maxland::Rng rng(9);
  auto s = maxland::init_state(4, InitialState::kPlus);
  maxland::apply_x_rotation(s, VertexSubset::of({1}), 0.4);
  maxland::apply_z_rotation(s, VertexSubset::of({1, 2}), 0.5);
  maxland::apply_x_rotation(s, VertexSubset::of({2, 3}), 1.3);
  const double before = maxland::expectation(s, g);
  auto s1 = s;
  maxland::apply_z_rotation(s1, VertexSubset::of({2, 4}), 0.77);
  EXPECT_NEAR(maxland::expectation(s1, g), before, 1e-12);
  auto s2 = s;
  maxland::apply_z_rotation(s2, VertexSubset::of({3}), kPi);
  for (std::size_t x = 0; x < s.dim(); ++x) EXPECT_NEAR(std::abs(s2[x] + s[x]), 0.0, 1e-14);
  auto s3 = s;
  maxland::apply_ising_evolution(s3, g, 0.0);
  for (std::size_t x = 0; x < s.dim(); ++x) EXPECT_EQ(s3[x], s[x]);
}

TEST(Expectation, Examples) {
  const Graph g = maxland::random_complete_graph(5, 0.0, 5.0, 4);
  EXPECT_NEAR(maxland::expectation(maxland::init_state(5, InitialState::kZeros), g), g.total_weight(), 1e-12);
  EXPECT_NEAR(maxland::expectation(maxland::init_state(5, InitialState::kPlus), g), 0.0, 1e-12);
  for (std::uint64_t x = 0; x < 32; ++x) {
    std::vector<Amplitude> amps(32, 0.0);
    amps[x] = Amplitude(0.0, 1.0);
    EXPECT_NEAR(maxland::expectation(maxland::StateVector(5, amps), g), maxland::ising_energy(g, VertexSubset(x)),
                1e-12);
  }
}

TEST(Circuit, SlotsAndSimplicity) {
  Circuit c(3, InitialState::kZeros);
  c.add(Layer::x_rotation(VertexSubset::of({1, 2})));
  EXPECT_TRUE(c.is_simple());
  c.add(Layer::x_local());
  EXPECT_EQ(c.num_params(), 4U);
  EXPECT_FALSE(c.is_simple());
  EXPECT_EQ(maxland::qaoa_circuit(8, 3).num_params(), 6U);
  EXPECT_EQ(maxland::qaoa_xlocal_circuit(8, 1, InitialState::kZeros).num_params(), 8U);
  EXPECT_EQ(maxland::qaoa_xlocal_circuit(8, 5, InitialState::kZeros).num_params(), 44U);
  const auto xz = maxland::xz_circuit(maxland::SimpleAnsatz::up_to_depth(8, 4), 8, maxland::XZVariant::kSubsetZ);
  EXPECT_EQ(xz.num_params(), 2U * (8 + 28 + 56 + 70));
  EXPECT_THROW(c.add(Layer::x_rotation(VertexSubset::of({4}))), maxland::Error);
}

TEST(CircuitFile, ParseAndRoundTrip) {
  const auto c = maxland::load_circuit("# demo\ninit plus\nxrot 1 3\nzrot 2\nising\nxlocal\nxmix\nzsum\n", 3);
  EXPECT_EQ(c.initial_state(), InitialState::kPlus);
  EXPECT_EQ(c.layers().size(), 6U);
  EXPECT_EQ(c.num_params(), 8U);
  const auto again = maxland::load_circuit(maxland::save_circuit(c), 3);
  EXPECT_EQ(again.layers().size(), c.layers().size());
  EXPECT_EQ(maxland::save_circuit(again), maxland::save_circuit(c));
  EXPECT_THROW(maxland::load_circuit("xrot\n", 3), maxland::ParseError);
  EXPECT_THROW(maxland::load_circuit("xrot 4\n", 3), maxland::ParseError);
  EXPECT_THROW(maxland::load_circuit("ising\ninit plus\n", 3), maxland::ParseError);
  EXPECT_THROW(maxland::load_circuit("swap 1 2\n", 3), maxland::ParseError);
  EXPECT_THROW(maxland::load_circuit("ising 2\n", 3), maxland::ParseError);
  EXPECT_THROW(maxland::load_circuit("init zeros\n", 3), maxland::ParseError);
}

TEST(RunCircuit, MatchesDenseOracleAllLayerKinds) {
  maxland::Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    const Graph g = maxland::random_complete_graph(n, 0.0, 5.0, rng());
    const Circuit c = mixed_circuit(n, rng, trial % 2 ? InitialState::kPlus : InitialState::kZeros);
    const auto th = oracle::random_angles(c.num_params(), rng);
    const auto run = maxland::run_circuit(c, th, g);
    EXPECT_NEAR(run.value, oracle::dense_objective(c, g, th), 1e-10);
    EXPECT_NEAR(run.state.norm(), 1.0, 1e-10 * static_cast<double>(c.layers().size()));
    const auto dense = oracle::dense_state(c, g, th);
    for (std::size_t x = 0; x < run.state.dim(); ++x) {
      EXPECT_NEAR(std::abs(run.state[x] - dense(static_cast<Eigen::Index>(x))), 0.0, 1e-10);
    }
  }
}

TEST(RunCircuit, ZeroParametersAndCommutingOrder) {
  maxland::Rng rng(23);
  const Graph g = maxland::random_complete_graph(6, 0.0, 5.0, 5);
  const auto ans = oracle::random_ansatz(6, 9, rng);
  const auto c = maxland::circuit_from_ansatz(ans, 6);
  EXPECT_NEAR(maxland::run_circuit(c, std::vector<double>(9, 0.0), g).value, g.total_weight(), 1e-12);
  const auto th = oracle::random_angles(9, rng);
  std::vector<std::size_t> perm = {8, 3, 5, 0, 1, 7, 2, 6, 4};
  std::vector<VertexSubset> el;
  std::vector<double> pth;
  for (auto p : perm) {
    el.push_back(ans[p]);
    pth.push_back(th[p]);
  }
  const auto pc = maxland::circuit_from_ansatz(maxland::SimpleAnsatz(el), 6);
  EXPECT_NEAR(maxland::run_circuit(pc, pth, g).value, maxland::run_circuit(c, th, g).value, 1e-12);
  const auto e = maxland::build_expansion(g, ans);
  EXPECT_NEAR(maxland::run_circuit(c, th, g).value, maxland::objective(e, th), 1e-10);
  EXPECT_THROW(maxland::run_circuit(c, std::vector<double>(8, 0.0), g), maxland::Error);
}

TEST(ReverseGradient, MatchesFiniteDifferencesAllLayerKinds) {
  maxland::Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const Graph g = maxland::random_complete_graph(n, 0.0, 5.0, rng());
    const Circuit c = mixed_circuit(n, rng, trial % 2 ? InitialState::kPlus : InitialState::kZeros);
    const maxland::CircuitSimulator sim(c, g);
    const auto th = oracle::random_angles(c.num_params(), rng);
    const auto grad = sim.gradient(th);
    const auto fd = oracle::fd_gradient([&](std::span<const double> x) { return sim.value(x); }, th, 1e-5);
    for (std::size_t k = 0; k < th.size(); ++k) EXPECT_NEAR(grad[k], fd[k], 1e-6 * (1.0 + std::abs(fd[k])));
  }
}

TEST(ReverseGradient, QaoaAndAnalytic) {
  maxland::Rng rng(37);
  const Graph g = maxland::random_complete_graph(6, 0.0, 5.0, 8);
  const auto q = maxland::qaoa_circuit(6, 3);
  const auto th = oracle::random_angles(q.num_params(), rng);
  const auto grad = maxland::reverse_gradient(q, th, g);
  const auto fd = oracle::fd_gradient([&](std::span<const double> x) { return maxland::run_circuit(q, x, g).value; }, th, 1e-5);
  for (std::size_t k = 0; k < th.size(); ++k) EXPECT_NEAR(grad[k], fd[k], 1e-6 * (1.0 + std::abs(fd[k])));

  const auto ans = oracle::random_ansatz(6, 10, rng);
  const auto e = maxland::build_expansion(g, ans);
  const auto t2 = oracle::random_angles(10, rng);
  const auto ga = maxland::gradient(e, t2);
  const auto gs = maxland::reverse_gradient(maxland::circuit_from_ansatz(ans, 6), t2, g);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_NEAR(ga[k], gs[k], 1e-9);
}

TEST(SampleCuts, BasisStateAlwaysSampled) {
  const Graph g = maxland::random_complete_graph(4, 0.0, 5.0, 6);
  std::vector<Amplitude> amps(16, 0.0);
  amps[0b0110] = Amplitude(0.0, -1.0);
  const auto r = maxland::sample_cuts(maxland::StateVector(4, amps), g, 500, 3);
  EXPECT_EQ(r.counts.size(), 1U);
  EXPECT_EQ(r.counts.at(0b0110), 500U);
  EXPECT_EQ(r.best.members, VertexSubset::of({2, 3}));
}

TEST(SampleCuts, UniformFindsMaxCutAndIsDeterministic) {
  const Graph g = maxland::random_complete_graph(4, 0.0, 5.0, 12);
  const auto plus = maxland::init_state(4, InitialState::kPlus);
  const auto r = maxland::sample_cuts(plus, g, 10000, 5);
  EXPECT_EQ(r.best_value, maxland::max_cut_exact(g).value);
  EXPECT_EQ(r.counts.size(), 16U);
  const auto r2 = maxland::sample_cuts(plus, g, 10000, 5);
  EXPECT_EQ(r.counts, r2.counts);
  EXPECT_THROW(maxland::sample_cuts(plus, g, 0, 1), maxland::Error);
}

TEST(CircuitSimulator, SizeMismatch) {
  const Graph g = maxland::random_complete_graph(4, 0.0, 5.0, 6);
  EXPECT_THROW(maxland::CircuitSimulator(maxland::qaoa_circuit(3, 1), g), maxland::Error);
}

}  // namespace
