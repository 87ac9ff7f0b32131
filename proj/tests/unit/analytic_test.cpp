#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "maxland/analytic.hpp"
#include "support/oracle.hpp"

namespace {

using maxland::EdgeExpansion;
using maxland::Graph;
using maxland::SimpleAnsatz;
using maxland::VertexSubset;

Graph triangle() { return maxland::random_complete_graph(3, 1.0, 1.0, 0); }

SimpleAnsatz doubled_classical(int n) {
  std::vector<VertexSubset> e;
  for (int v = 1; v <= n; ++v) {
    e.push_back(VertexSubset::of({v}));
    e.push_back(VertexSubset::of({v}));
  }
  return SimpleAnsatz(std::move(e));
}

TEST(Ansatz, Constructors) {
  EXPECT_THROW(SimpleAnsatz({VertexSubset{}}), maxland::Error);
  EXPECT_EQ(SimpleAnsatz::classical(5).size(), 5U);
  EXPECT_EQ(SimpleAnsatz::up_to_depth(8, 2).size(), 8U + 28U);
  EXPECT_EQ(SimpleAnsatz::up_to_depth(8, 7).size(), 254U);
  EXPECT_EQ(SimpleAnsatz::up_to_depth(8, 7).depth(), 7);
  EXPECT_EQ(SimpleAnsatz::full(5).size(), 15U);
  const auto d2 = SimpleAnsatz::up_to_depth(3, 2);
  const std::vector<VertexSubset> expected = {VertexSubset::of({1}),    VertexSubset::of({2}),
                                              VertexSubset::of({3}),    VertexSubset::of({1, 2}),
                                              VertexSubset::of({1, 3}), VertexSubset::of({2, 3})};
  EXPECT_EQ(d2.elements(), expected);
}

TEST(AnsatzFile, ParsesListsAndDirective) {
  const auto a = maxland::load_ansatz("# two elements\n1 3\n\n2\n", 3);
  EXPECT_EQ(a.elements(), (std::vector<VertexSubset>{VertexSubset::of({1, 3}), VertexSubset::of({2})}));
  EXPECT_EQ(maxland::load_ansatz("depth 2\n", 4).elements(), SimpleAnsatz::up_to_depth(4, 2).elements());
  EXPECT_THROW(maxland::load_ansatz("1 5\n", 4), maxland::ParseError);
  EXPECT_THROW(maxland::load_ansatz("1 1\n", 4), maxland::ParseError);
  EXPECT_THROW(maxland::load_ansatz("depth 2\n1\n", 4), maxland::ParseError);
  EXPECT_THROW(maxland::load_ansatz("# nothing\n", 4), maxland::ParseError);
  EXPECT_THROW(maxland::load_ansatz("1 x\n", 4), maxland::ParseError);
}

TEST(Expansion, ClassicalTriangle) {
  const auto e = maxland::build_expansion(triangle(), SimpleAnsatz::classical(3));
  for (const auto& et : e.edges()) {
    EXPECT_EQ(et.width(), 2U);
    EXPECT_EQ(et.kernel.nullity(), 0U);
    EXPECT_EQ(et.term_count, 1U);
  }
}

TEST(Expansion, DoubledClassical) {
  const auto e = maxland::build_expansion(triangle(), doubled_classical(3));
  for (const auto& et : e.edges()) {
    EXPECT_EQ(et.width(), 4U);
    EXPECT_EQ(et.kernel.nullity(), 2U);
  }
  EXPECT_EQ(e.total_terms(), 12U);
}

TEST(Expansion, ElementCuttingNothing) {
  // {1,2,3} on a triangle contains both endpoints of every edge.
  const auto e = maxland::build_expansion(triangle(), SimpleAnsatz({VertexSubset::of({1, 2, 3}), VertexSubset::of({1})}));
  for (const auto& et : e.edges()) {
    EXPECT_EQ(std::count(et.elements.begin(), et.elements.end(), 0U), 0);
  }
}

TEST(Expansion, LimitNamesEdge) {
  std::vector<VertexSubset> many(8, VertexSubset::of({1}));
  try {
    maxland::build_expansion(triangle(), SimpleAnsatz(many), 4);
    FAIL();
  } catch (const maxland::LimitError& err) {
    EXPECT_NE(std::string(err.what()).find("edge (1,2)"), std::string::npos) << err.what();
  }
}

TEST(Objective, ZeroAnglesGiveTotalWeight) {
  const Graph g = maxland::random_complete_graph(6, 0.0, 5.0, 4);
  const auto e = maxland::build_expansion(g, SimpleAnsatz::up_to_depth(6, 2));
  const std::vector<double> zero(e.num_params(), 0.0);
  EXPECT_NEAR(maxland::objective(e, zero), g.total_weight(), 1e-12);
  for (double gk : maxland::gradient(e, zero)) EXPECT_NEAR(gk, 0.0, 1e-12);
}

TEST(Objective, ClassicalClosedForm) {
  maxland::Rng rng(2);
  const Graph g = maxland::random_complete_graph(5, 0.0, 5.0, 9);
  const auto e = maxland::build_expansion(g, SimpleAnsatz::classical(5));
  for (int trial = 0; trial < 20; ++trial) {
    const auto th = oracle::random_angles(5, rng);
    double expect = 0.0;
    for (const auto& ed : g.edges()) expect += ed.w * std::cos(2 * th[ed.a - 1]) * std::cos(2 * th[ed.b - 1]);
    EXPECT_NEAR(maxland::objective(e, th), expect, 1e-12);
    // dJ/dtheta_a = -2 sin(2 theta_a) sum_b w_ab cos(2 theta_b)
    const auto grad = maxland::gradient(e, th);
    for (int a = 1; a <= 5; ++a) {
      double s = 0.0;
      for (int b = 1; b <= 5; ++b) {
        if (b != a) s += g.weight(a, b) * std::cos(2 * th[b - 1]);
      }
      EXPECT_NEAR(grad[a - 1], -2.0 * std::sin(2 * th[a - 1]) * s, 1e-11);
      const auto [sk, tk] = maxland::s_t_terms(e, th, a - 1);
      EXPECT_NEAR(sk, s, 1e-12);
      EXPECT_EQ(tk, 0.0);
    }
    // d2J/dtheta_a dtheta_b = 4 sin(2 theta_a) sin(2 theta_b) w_ab
    const auto h = maxland::hessian(e, th);
    for (int a = 1; a <= 5; ++a) {
      for (int b = a + 1; b <= 5; ++b) {
        EXPECT_NEAR(h(a - 1, b - 1), 4.0 * std::sin(2 * th[a - 1]) * std::sin(2 * th[b - 1]) * g.weight(a, b), 1e-11);
      }
    }
  }
}

TEST(Objective, MatchesDenseOracle) {
  maxland::Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const Graph g = maxland::random_complete_graph(n, 0.0, 5.0, rng());
    const auto ans = oracle::random_ansatz(n, 1 + rng() % 8, rng);
    const auto e = maxland::build_expansion(g, ans);
    const auto th = oracle::random_angles(ans.size(), rng);
    EXPECT_NEAR(maxland::objective(e, th), oracle::dense_objective(ans, g, th), 1e-10);
  }
}

TEST(Objective, PeriodAndRange) {
  maxland::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = maxland::random_complete_graph(6, 0.0, 5.0, rng());
    const auto ans = oracle::random_ansatz(6, 10, rng);
    const auto e = maxland::build_expansion(g, ans);
    auto th = oracle::random_angles(ans.size(), rng);
    const double j = maxland::objective(e, th);
    EXPECT_LE(std::abs(j), g.total_weight() + 1e-12);
    for (std::size_t k = 0; k < th.size(); ++k) {
      th[k] += std::numbers::pi;
      EXPECT_NEAR(maxland::objective(e, th), j, 1e-12);
      th[k] -= std::numbers::pi;
    }
  }
}

TEST(STTerms, IndependentOfOwnAngleAndDecomposeObjective) {
  maxland::Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = maxland::random_complete_graph(6, 0.0, 5.0, rng());
    const auto ans = oracle::random_ansatz(6, 9, rng);
    const auto e = maxland::build_expansion(g, ans);
    auto th = oracle::random_angles(ans.size(), rng);
    const auto all = maxland::s_t_all(e, th);
    for (std::size_t k = 0; k < th.size(); ++k) {
      const auto [s, t] = maxland::s_t_terms(e, th, k);
      EXPECT_NEAR(s, all.s[k], 1e-12);
      EXPECT_NEAR(t, all.t[k], 1e-12);
      // J = cos(2t_k) S_k + sin(2t_k) T_k + V_k with V_k independent of theta_k.
      const double v0 = maxland::objective(e, th) - std::cos(2 * th[k]) * s - std::sin(2 * th[k]) * t;
      const double saved = th[k];
      th[k] = saved + 0.37;
      const auto [s2, t2] = maxland::s_t_terms(e, th, k);
      EXPECT_EQ(s2, s);
      EXPECT_EQ(t2, t);
      const double v1 = maxland::objective(e, th) - std::cos(2 * th[k]) * s - std::sin(2 * th[k]) * t;
      EXPECT_NEAR(v0, v1, 1e-11);
      th[k] = saved;
    }
    const std::vector<double> zero(ans.size(), 0.0);
    for (double t : maxland::s_t_all(e, zero).t) EXPECT_EQ(t, 0.0);
  }
}

TEST(Derivatives, MatchFiniteDifferences) {
  maxland::Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 4);
    const Graph g = maxland::random_complete_graph(n, 0.0, 5.0, rng());
    const auto ans = oracle::random_ansatz(n, 2 + rng() % 9, rng);
    const auto e = maxland::build_expansion(g, ans);
    const auto th = oracle::random_angles(ans.size(), rng);
    const oracle::ScalarFn f = [&](std::span<const double> x) { return maxland::objective(e, x); };
    const auto grad = maxland::gradient(e, th);
    const auto fd = oracle::fd_gradient(f, th, 1e-5);
    for (std::size_t k = 0; k < th.size(); ++k) EXPECT_NEAR(grad[k], fd[k], 1e-6 * (1.0 + std::abs(fd[k])));
    const auto h = maxland::hessian(e, th);
    const auto fdh = oracle::fd_hessian(f, th, 1e-4);
    const double tol = 1e-5 * (1.0 + h.cwiseAbs().rowwise().sum().maxCoeff());
    EXPECT_LE((h - fdh).cwiseAbs().maxCoeff(), tol);
    EXPECT_EQ((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const auto st = maxland::s_t_all(e, th);
    for (std::size_t k = 0; k < th.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      EXPECT_NEAR(h(kk, kk), -4.0 * (std::cos(2 * th[k]) * st.s[k] + std::sin(2 * th[k]) * st.t[k]), 1e-11);
    }
  }
}

TEST(Hessian, AtZeroIsDiagonalCutValues) {
  const Graph g = maxland::random_complete_graph(5, 0.0, 5.0, 3);
  const auto ans = SimpleAnsatz::up_to_depth(5, 2);
  const auto e = maxland::build_expansion(g, ans);
  const auto h = maxland::hessian(e, std::vector<double>(ans.size(), 0.0));
  for (std::size_t k = 0; k < ans.size(); ++k) {
    for (std::size_t j = 0; j < ans.size(); ++j) {
      const double expect = j == k ? -4.0 * maxland::cut_value(g, ans[k]) : 0.0;
      EXPECT_NEAR(h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)), expect, 1e-11);
    }
  }
}

TEST(Objective, LengthMismatch) {
  const auto e = maxland::build_expansion(triangle(), SimpleAnsatz::classical(3));
  EXPECT_THROW(maxland::objective(e, std::vector<double>(2, 0.0)), maxland::Error);
  EXPECT_THROW(maxland::s_t_terms(e, std::vector<double>(3, 0.0), 3), maxland::Error);
}

}  // namespace
