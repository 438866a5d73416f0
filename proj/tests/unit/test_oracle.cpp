#include "sseplab/numerics.hpp"
#include "sseplab/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <queue>

namespace sseplab {
namespace {

double bernoulli_weight(std::uint64_t s, int sites, double rho) {
  const int k = __builtin_popcountll(s);
  return std::pow(rho, k) * std::pow(1 - rho, sites - k);
}

TEST(FullGenerator, ThreeSiteStructure) {
  SystemParams p{3, 0.0, 0.2, 0.8};
  const auto q = build_full_generator(p);
  ASSERT_EQ(q.rows(), 4);
  for (int i = 0; i < 4; ++i) {
    const auto c = Configuration::from_index(i, 3);
    const int expected = 2 + (c[1] != c[2]);
    int off = 0;
    double sum = 0;
    for (SparseRowMatrix::InnerIterator it(q, i); it; ++it) {
      sum += it.value();
      if (it.col() != i) {
        ++off;
        EXPECT_GT(it.value(), 0.0);
      }
    }
    EXPECT_EQ(off, expected);
    EXPECT_NEAR(sum, 0.0, 1e-12);
  }
}

TEST(FullGenerator, DetailedBalanceAtEquilibrium) {
  SystemParams p{6, 1.0, 0.35, 0.35};
  const auto q = build_full_generator(p);
  for (int i = 0; i < q.rows(); ++i)
    for (SparseRowMatrix::InnerIterator it(q, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (j == i) continue;
      const double lhs = bernoulli_weight(i, 5, 0.35) * it.value();
      const double rhs = bernoulli_weight(j, 5, 0.35) * q.coeff(j, i);
      EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(FullGenerator, StronglyConnected) {
  SystemParams p{6, 2.0, 0.1, 0.9};
  const auto q = build_full_generator(p);
  std::vector<bool> seen(q.rows(), false);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = true;
  while (!todo.empty()) {
    const int i = todo.front();
    todo.pop();
    for (SparseRowMatrix::InnerIterator it(q, i); it; ++it)
      if (!seen[it.col()]) {
        seen[it.col()] = true;
        todo.push(static_cast<int>(it.col()));
      }
  }
  for (bool b : seen) EXPECT_TRUE(b);
}

TEST(FullGenerator, SizeGuard) { EXPECT_THROW(build_full_generator({15, 0.0, 0.2, 0.8}), std::invalid_argument); }

TEST(StationaryDistribution, EquilibriumIsBernoulli) {
  SystemParams p{7, 0.5, 0.6, 0.6};
  double res = 1;
  const auto s = stationary_distribution(p, &res);
  EXPECT_LE(res, 1e-11);
  for (int i = 0; i < s.probs.size(); ++i) EXPECT_NEAR(s.probs[i], bernoulli_weight(i, 6, 0.6), 1e-11);
}

TEST(StationaryDistribution, SmallMarginals) {
  const auto a = exact_observables(stationary_distribution({3, 0.0, 0.2, 0.8}), {3, 0.0, 0.2, 0.8});
  EXPECT_NEAR(a.profile[1], 0.4, 1e-12);
  EXPECT_NEAR(a.profile[2], 0.6, 1e-12);
  SystemParams p{4, 1.0, 0.2, 0.8};
  const auto b = exact_observables(stationary_distribution(p), p);
  EXPECT_NEAR(b.profile[1], 0.44, 1e-12);
  EXPECT_NEAR(b.profile[2], 0.50, 1e-12);
  EXPECT_NEAR(b.profile[3], 0.56, 1e-12);
  EXPECT_NEAR(b.correlation(1, 2), -0.008, 1e-12);
}

TEST(StationaryDistribution, ClosedFormsAcrossGrid) {
  for (int n = 4; n <= 9; ++n)
    for (double theta : {0.0, 0.5, 1.0, 2.0, 3.0}) {
      SystemParams p{n, theta, 0.2, 0.8};
      const auto o = exact_observables(stationary_distribution(p), p);
      const auto rho = stationary_profile(p);
      const auto phi = stationary_correlation(p);
      for (int x = 1; x < n; ++x) {
        EXPECT_NEAR(o.profile[x], rho[x], 1e-9);
        for (int y = x + 1; y < n; ++y) EXPECT_NEAR(o.correlation(x, y), phi(x, y), 1e-9);
      }
    }
}

TEST(EvolveDistribution, IdentityAndConservation) {
  SystemParams p{6, 0.5, 0.2, 0.8};
  const auto s0 = MasterState::point(Configuration({1, 0, 1, 1, 0}));
  EXPECT_EQ((evolve_distribution(s0, p, 0.0).probs - s0.probs).cwiseAbs().maxCoeff(), 0.0);
  const auto s = evolve_distribution(s0, p, 0.3);
  EXPECT_NEAR(s.total(), 1.0, 1e-12);
  EXPECT_GE(s.probs.minCoeff(), -1e-14);
}

TEST(EvolveDistribution, ConvergesToStationary) {
  SystemParams p{5, 1.0, 0.2, 0.8};
  const auto s = evolve_distribution(MasterState::point(Configuration::full(5)), p, 40.0);
  const auto pi = stationary_distribution(p);
  EXPECT_LE(0.5 * (s.probs - pi.probs).cwiseAbs().sum(), 1e-8);
}

TEST(EvolveDistribution, MarginalsMatchProfileEquation) {
  SystemParams p{7, 2.0, 0.3, 0.9};
  const Configuration c({0, 1, 1, 0, 0, 1});
  ProfileVector r0{0.0, {0.3, 0, 1, 1, 0, 0, 1, 0.9}};
  for (double t : {0.05, 0.4}) {
    const auto o = exact_observables(evolve_distribution(MasterState::point(c), p, t), p);
    const auto r = evolve_profile(r0, p, t);
    for (int x = 1; x < 7; ++x) EXPECT_NEAR(o.profile[x], r[x], 1e-6);
  }
}

TEST(ExactObservables, ProductStateHasNoCorrelation) {
  SystemParams p{6, 0.0, 0.2, 0.8};
  const std::vector<double> m{0.1, 0.3, 0.5, 0.7, 0.9};
  const auto o = exact_observables(MasterState::product(m), p);
  EXPECT_LE(o.correlation.max_abs(), 1e-15);
  for (int x = 1; x < 6; ++x) EXPECT_NEAR(o.profile[x], m[x - 1], 1e-15);
}

TEST(ExactObservables, FieldVarianceTwoWays) {
  SystemParams p{8, 1.0, 0.2, 0.8};
  const auto s = evolve_distribution(MasterState::point(Configuration({1, 1, 0, 0, 1, 0, 1})), p, 0.05);
  auto f = [](double u) { return std::cos(2 * u) - u; };
  EXPECT_NEAR(field_second_moment(s, f), field_second_moment(exact_observables(s, p), f), 1e-10);
}

TEST(Duhamel, Residuals) {
  for (double theta : {0.0, 2.0}) {
    SystemParams p{5, theta, 0.2, 0.8};
    const auto init = MasterState::point(Configuration({1, 0, 0, 1}));
    EXPECT_LE(duhamel_check(p, 0.3, 0.3, 2, init), 1e-12);
    EXPECT_LE(duhamel_check(p, 0.2, 0.7, 1, init), 1e-8);
  }
}

TEST(PartitionFunction, GammaRatio) {
  const auto c = partition_function_check({4, 0.0, 0.2, 0.8});
  EXPECT_NEAR(c.gamma_ratio, 24.0, 1e-12);
  EXPECT_NEAR(c.chain_product, 24.0, 1e-12);
  EXPECT_LE(c.relative_error, 1e-12);
  EXPECT_LE(c.stationary_consistency, 1e-9);
  const auto d = partition_function_check({3, 1.0, 0.2, 0.8});
  EXPECT_NEAR(d.chain_product, 6.0 * 7.0, 1e-12);
  EXPECT_LE(d.relative_error, 1e-12);
}

TEST(PartitionFunction, ReservoirSwapIsConsistent) {
  const auto a = partition_function_check({5, 0.5, 0.2, 0.8});
  const auto b = partition_function_check({5, 0.5, 0.8, 0.2});
  EXPECT_LE(a.stationary_consistency, 1e-9);
  EXPECT_LE(b.stationary_consistency, 1e-9);
  EXPECT_NEAR(a.chain_product, b.chain_product, 1e-12);
  EXPECT_THROW(partition_function_check({5, 0.5, 0.4, 0.4}), std::invalid_argument);
}

}  // namespace
}  // namespace sseplab
