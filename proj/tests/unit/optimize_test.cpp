#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "maxland/analytic.hpp"
#include "maxland/optimize.hpp"
#include "support/oracle.hpp"

namespace {

using maxland::BfgsConfig;
using maxland::ObjectiveFn;
using maxland::Termination;

TEST(Bfgs, ScalarQuadratic) {
  const ObjectiveFn f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 2.0 * (x[0] - 3.0);
    return (x[0] - 3.0) * (x[0] - 3.0);
  };
  const auto r = maxland::minimize(f, std::vector<double>{0.0});
  EXPECT_EQ(r.termination, Termination::kConverged);
  EXPECT_NEAR(r.theta[0], 3.0, 1e-9);
  EXPECT_NEAR(r.value, 0.0, 1e-16);
  EXPECT_LE(r.iterations, 5U);
}

TEST(Bfgs, Rosenbrock) {
  const ObjectiveFn f = [](std::span<const double> x, std::span<double> g) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  const auto r = maxland::minimize(f, std::vector<double>{-1.2, 1.0});
  EXPECT_NEAR(r.theta[0], 1.0, 1e-6);
  EXPECT_NEAR(r.theta[1], 1.0, 1e-6);
  for (std::size_t i = 1; i < r.accepted_values.size(); ++i) {
    EXPECT_LE(r.accepted_values[i], r.accepted_values[i - 1]);
  }
}

TEST(Bfgs, ConvexQuadraticsConvergeInDPlusTwo) {
  maxland::Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 10);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(d, d);
    const Eigen::MatrixXd q = a * a.transpose() + Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd b = Eigen::VectorXd::Random(d);
    const ObjectiveFn f = [&](std::span<const double> x, std::span<double> g) {
      const Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
      const Eigen::VectorXd grad = q * xv - b;
      Eigen::Map<Eigen::VectorXd>(g.data(), d) = grad;
      return 0.5 * xv.dot(q * xv) - b.dot(xv);
    };
    const auto r = maxland::minimize(f, std::vector<double>(static_cast<std::size_t>(d), 0.0));
    EXPECT_EQ(r.termination, Termination::kConverged) << "d=" << d;
    EXPECT_LE(r.iterations, static_cast<std::size_t>(d + 2)) << "d=" << d;
    EXPECT_LE(r.grad_norm, BfgsConfig{}.grad_tol);
  }
}

TEST(Bfgs, SingleEdgeClassicalFindsCut) {
  const auto g = maxland::load_graph("2 1\n1 2 2.5\n");
  const auto e = maxland::build_expansion(g, maxland::SimpleAnsatz::classical(2));
  const ObjectiveFn f = [&](std::span<const double> x, std::span<double> grad) {
    const auto gv = maxland::gradient(e, x);
    std::copy(gv.begin(), gv.end(), grad.begin());
    return maxland::objective(e, x);
  };
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = maxland::minimize(f, maxland::random_init(2, seed));
    EXPECT_NEAR(r.value, -2.5, 1e-9) << "seed " << seed;
    for (std::size_t i = 1; i < r.accepted_values.size(); ++i) {
      EXPECT_LE(r.accepted_values[i], r.accepted_values[i - 1]);
    }
  }
}

TEST(Bfgs, ConvergedMeansSmallGradient) {
  maxland::Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = maxland::random_complete_graph(6, 0.0, 5.0, rng());
    const auto ans = oracle::random_ansatz(6, 8, rng);
    const auto e = maxland::build_expansion(g, ans);
    const ObjectiveFn f = [&](std::span<const double> x, std::span<double> grad) {
      const auto gv = maxland::gradient(e, x);
      std::copy(gv.begin(), gv.end(), grad.begin());
      return maxland::objective(e, x);
    };
    const auto r = maxland::minimize(f, maxland::random_init(8, rng()));
    const auto gv = maxland::gradient(e, r.theta);
    double norm = 0.0;
    for (double x : gv) norm = std::max(norm, std::abs(x));
    EXPECT_EQ(norm, r.grad_norm);
    if (r.termination == Termination::kConverged) {
      EXPECT_LE(norm, 1e-8);
    }
    EXPECT_EQ(r.value, maxland::objective(e, r.theta));
  }
}

TEST(Bfgs, NonFiniteObjectiveIsError) {
  const ObjectiveFn f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 1.0;
    return x[0] < -0.5 ? std::nan("") : x[0];
  };
  EXPECT_THROW(maxland::minimize(f, std::vector<double>{0.0}), maxland::Error);
}

TEST(Bfgs, ConfigValidation) {
  const ObjectiveFn f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 2 * x[0];
    return x[0] * x[0];
  };
  BfgsConfig bad;
  bad.wolfe_c1 = 0.95;
  EXPECT_THROW(maxland::minimize(f, std::vector<double>{1.0}, bad), maxland::Error);
  bad = {};
  bad.grad_tol = 0.0;
  EXPECT_THROW(maxland::minimize(f, std::vector<double>{1.0}, bad), maxland::Error);
  EXPECT_THROW(maxland::minimize(f, std::vector<double>{}), maxland::Error);
}

TEST(Bfgs, MaxItersReported) {
  const ObjectiveFn f = [](std::span<const double> x, std::span<double> g) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  BfgsConfig cfg;
  cfg.max_iters = 3;
  const auto r = maxland::minimize(f, std::vector<double>{-1.2, 1.0}, cfg);
  EXPECT_EQ(r.termination, Termination::kMaxIters);
  EXPECT_EQ(r.iterations, 3U);
  EXPECT_EQ(maxland::to_string(r.termination), "max-iters");
}

TEST(RandomInit, RangeDeterminismErrors) {
  const auto a = maxland::random_init(1000, 42);
  for (double t : a) {
    EXPECT_GE(t, 0.0);
    EXPECT_LT(t, 2.0 * std::numbers::pi);
  }
  EXPECT_EQ(a, maxland::random_init(1000, 42));
  EXPECT_NE(a, maxland::random_init(1000, 43));
  EXPECT_THROW(maxland::random_init(0, 1), maxland::Error);
}

TEST(WrapAngles, IntoPeriod) {
  const auto w = maxland::wrap_angles(std::vector<double>{-0.5, 7.0, 2.0 * std::numbers::pi, 1.0});
  EXPECT_NEAR(w[0], 2.0 * std::numbers::pi - 0.5, 1e-15);
  EXPECT_NEAR(w[1], 7.0 - 2.0 * std::numbers::pi, 1e-15);
  EXPECT_EQ(w[2], 0.0);
  EXPECT_EQ(w[3], 1.0);
}

}  // namespace
