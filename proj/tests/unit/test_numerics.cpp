#include "sseplab/numerics.hpp"
#include "sseplab/operators.hpp"
#include "sseplab/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

namespace sseplab {
namespace {

using std::numbers::pi;

TEST(Operators, GeneratorPropertyHoldsExactly) {
  for (int n : {3, 5, 9}) {
    for (double theta : {0.0, 0.5, 2.0}) {
      SystemParams p{n, theta, 0.2, 0.8};
      for (const auto& op : {DiscreteOperator::absorbed_line(p), DiscreteOperator::absorbed_triangle(p),
                             DiscreteOperator::reflected_line(n), DiscreteOperator::reflected_triangle(n)}) {
        const auto c = op.check_generator();
        EXPECT_LE(c.max_row_sum, 4 * std::numeric_limits<double>::epsilon() * op.max_exit_rate());
        EXPECT_TRUE(c.off_diagonal_nonnegative);
        EXPECT_TRUE(c.absorbing_rows_zero);
      }
    }
  }
}

TEST(Operators, TriangleUsesNearestNeighbours) {
  const auto op = DiscreteOperator::absorbed_triangle({6, 0.0, 0.3, 0.6});
  const int s = op.state_of(2, 4);
  EXPECT_EQ(op.out(s).size(), 4u);
  for (const auto& r : op.out(s)) {
    const auto [x, y] = op.coords(r.to);
    EXPECT_EQ(std::abs(x - 2) + std::abs(y - 4), 1);
  }
}

TEST(StationaryProfile, FourSites) {
  const auto a = stationary_profile({4, 0.0, 0.2, 0.8});
  const auto b = stationary_profile({4, 1.0, 0.2, 0.8});
  const double wa[] = {0.35, 0.5, 0.65}, wb[] = {0.44, 0.5, 0.56};
  for (int x = 1; x <= 3; ++x) {
    EXPECT_NEAR(a[x], wa[x - 1], 1e-15);
    EXPECT_NEAR(b[x], wb[x - 1], 1e-15);
  }
  EXPECT_EQ(a[0], 0.2);
  EXPECT_EQ(a[4], 0.8);
}

TEST(StationaryProfile, FlatWhenReservoirsAgree) {
  for (double v : stationary_profile({9, 0.7, 0.4, 0.4}).values) EXPECT_NEAR(v, 0.4, 1e-15);
}

TEST(StationaryProfile, ResidualVanishes) {
  for (double theta : {0.0, 0.5, 1.0, 3.0}) {
    SystemParams p{40, theta, 0.1, 0.9};
    EXPECT_LE(profile_residual(p, stationary_profile(p)), 1e-9);
  }
}

TEST(HydroStationary, Regimes) {
  EXPECT_DOUBLE_EQ(hydro_stationary_profile(0.0, 0.5, 0.2, 0.8), 0.2);
  EXPECT_DOUBLE_EQ(hydro_stationary_profile(0.3, 2.0, 0.2, 0.8), 0.5);
  EXPECT_NEAR(hydro_stationary_profile(0.0, 1.0, 0.2, 0.8), 0.4, 1e-15);
  EXPECT_NEAR(hydro_stationary_profile(1.0, 1.0, 0.2, 0.8), 0.6, 1e-15);
}

TEST(HydroStationary, DiscreteProfileConverges) {
  for (double theta : {0.0, 0.5, 1.0, 2.0}) {
    double prev = 1;
    for (int n : {16, 64, 256, 1024}) {
      SystemParams p{n, theta, 0.2, 0.8};
      const auto r = stationary_profile(p);
      double err = 0;
      for (int x = 1; x < n; ++x) err = std::max(err, std::abs(r[x] - hydro_stationary_profile(double(x) / n, theta, 0.2, 0.8)));
      EXPECT_LE(err, prev) << theta;
      prev = err;
    }
    EXPECT_LT(prev, 0.05);
  }
}

TEST(StationaryCorrelation, FourSites) {
  EXPECT_NEAR(stationary_correlation({4, 0.0, 0.2, 0.8})(1, 2), -0.015, 1e-15);
  EXPECT_NEAR(stationary_correlation({4, 1.0, 0.2, 0.8})(1, 2), -0.008, 1e-15);
  EXPECT_EQ(stationary_correlation({8, 0.5, 0.4, 0.4}).max_abs(), 0.0);
}

TEST(StationaryCorrelation, ResidualVanishes) {
  for (double theta : {0.0, 1.0, 2.5}) {
    SystemParams p{24, theta, 0.2, 0.8};
    EXPECT_LE(correlation_residual(p, stationary_correlation(p), stationary_profile(p)), 1e-7);
  }
}

TEST(EvolveProfile, StationaryIsFixed) {
  SystemParams p{12, 0.5, 0.2, 0.8};
  const auto r0 = stationary_profile(p);
  const auto r = evolve_profile(r0, p, 0.7);
  for (int x = 0; x <= 12; ++x) EXPECT_NEAR(r[x], r0[x], 1e-8);
}

TEST(EvolveProfile, MatchesOracleMarginals) {
  SystemParams p{3, 0.0, 0.2, 0.8};
  ProfileVector r0{0.0, {0.2, 1.0, 0.0, 0.8}};
  for (double t : {0.1, 1.0}) {
    const auto exact = exact_observables(evolve_distribution(MasterState::point(Configuration({1, 0})), p, t), p);
    const auto r = evolve_profile(r0, p, t);
    for (int x = 1; x < 3; ++x) EXPECT_NEAR(r[x], exact.profile[x], 1e-6);
  }
}

TEST(EvolveProfile, MaximumPrinciple) {
  SystemParams p{20, 1.0, 0.3, 0.6};
  const auto r0 = sample_profile(p, [](double u) { return 0.1 + 0.8 * u * u; });
  for (const auto& r : evolve_profile(r0, p, std::vector<double>{0.01, 0.1, 1.0}))
    for (double v : r.values) {
      EXPECT_GE(v, 0.1 - 1e-12);
      EXPECT_LE(v, 0.9 + 1e-12);
    }
}

TEST(ProfilePath, AgreesWithOde) {
  SystemParams p{16, 1.5, 0.2, 0.8};
  const auto r0 = sample_profile(p, [](double u) { return 0.5 + 0.3 * std::sin(pi * u); });
  ProfilePath path(p, r0);
  const auto ode = evolve_profile(r0, p, 0.4);
  const auto spec = path(0.4);
  for (int x = 0; x <= 16; ++x) EXPECT_NEAR(spec[x], ode[x], 1e-9);
}

TEST(EvolveCorrelation, FlatProfileStaysZero) {
  SystemParams p{8, 0.0, 0.4, 0.4};
  ProfileVector flat{0.0, std::vector<double>(9, 0.4)};
  const auto phi = evolve_correlation(CorrelationField(8, 0.0), [&](double) { return flat; }, p, 1.0);
  EXPECT_LE(phi.max_abs(), 1e-15);
}

TEST(EvolveCorrelation, StationaryIsFixed) {
  SystemParams p{10, 1.0, 0.2, 0.8};
  const auto rho = stationary_profile(p);
  auto phi0 = stationary_correlation(p);
  const auto phi = evolve_correlation(phi0, [&](double) { return rho; }, p, 0.5);
  for (int x = 1; x < 10; ++x)
    for (int y = x + 1; y < 10; ++y) EXPECT_NEAR(phi(x, y), phi0(x, y), 1e-7);
}

TEST(EvolveCorrelation, MatchesOracleFromProductLaw) {
  SystemParams p{4, 0.0, 0.2, 0.8};
  const auto rho0 = stationary_profile(p);
  const std::vector<double> m(rho0.values.begin() + 1, rho0.values.end() - 1);
  const auto exact = exact_observables(evolve_distribution(MasterState::product(m), p, 0.5), p);
  ProfilePath path(p, rho0);
  const auto phi = evolve_correlation(CorrelationField(4, 0.0), path, p, std::vector<double>{0.5});
  for (int x = 1; x < 4; ++x)
    for (int y = x + 1; y < 4; ++y) EXPECT_NEAR(phi[0](x, y), exact.correlation(x, y), 1e-6);
}

TEST(DirichletSpectrum, Orthonormal) {
  const int n = 12;
  for (int l = 1; l < n; ++l)
    for (int m = 1; m < n; ++m) {
      double s = 0;
      for (int x = 1; x < n; ++x) s += dirichlet_eigenvector(l, x, n) * dirichlet_eigenvector(m, x, n);
      EXPECT_NEAR(s, l == m ? 1.0 : 0.0, 1e-10);
    }
}

TEST(DirichletSpectrum, Eigenvectors) {
  const int n = 10;
  for (int l = 1; l < n; ++l)
    for (int x = 1; x < n; ++x) {
      auto v = [&](int z) { return z == 0 || z == n ? 0.0 : dirichlet_eigenvector(l, z, n); };
      const double lhs = n * n * (v(x + 1) + v(x - 1) - 2 * v(x));
      EXPECT_NEAR(lhs, -dirichlet_eigenvalue(l, n) * v(x), 1e-9 * dirichlet_eigenvalue(l, n));
    }
}

TEST(HeatKernel, InitialDeltaAndSymmetry) {
  const int n = 9;
  for (int x = 1; x < n; ++x)
    for (int y = 1; y < n; ++y) {
      EXPECT_NEAR(heat_kernel_dirichlet(x, y, 0.0, n), x == y ? 1.0 : 0.0, 1e-12);
      EXPECT_NEAR(heat_kernel_dirichlet(x, y, 0.05, n), heat_kernel_dirichlet(y, x, 0.05, n), 1e-12);
    }
}

TEST(HeatKernel, MassDecreases) {
  const int n = 9;
  double prev = 1 + 1e-12;
  for (double t : {0.0, 0.01, 0.05, 0.2, 1.0}) {
    double mass = 0;
    for (int y = 1; y < n; ++y) mass += heat_kernel_dirichlet(4, y, t, n);
    EXPECT_LE(mass, prev);
    prev = mass - (t > 0 ? 1e-12 : 0);
  }
}

TEST(HeatKernel, AgreesWithOdeKernel) {
  const int n = 16;
  const std::vector<double> ts{0.01, 0.1, 0.5};
  const auto k = absorbed_kernel({n, 0.0, 0.2, 0.8}, ts);
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (int x = 1; x < n; ++x)
      for (int y = 1; y < n; ++y) EXPECT_NEAR(k[i](x - 1, y - 1), heat_kernel_dirichlet(x, y, ts[i], n), 1e-8);
}

TEST(Psi, Values) {
  EXPECT_NEAR(psi(0.0), 0.5, 1e-15);
  EXPECT_NEAR(psi(1e-9), 0.5, 1e-9);
  EXPECT_NEAR(psi(1.0), std::exp(-1.0), 1e-15);
  for (double v : {0.5e-4, 0.99999e-4, 1.00001e-4, 0.3}) {
    long double term = 0.5L, sum = 0.5L;
    for (int k = 1; k < 30; ++k) {
      term *= -static_cast<long double>(v) / (k + 2);
      sum += term;
    }
    EXPECT_NEAR(psi(v), static_cast<double>(sum), 1e-15) << v;
  }
  const double u = 3.7;
  EXPECT_NEAR(psi(u), (std::exp(-u) - 1 + u) / (u * u), 1e-15);
}

TEST(Psi, RejectsNegative) { EXPECT_THROW(psi(-1.0), std::invalid_argument); }

TEST(DoubleTimeIntegral, MatchesDirectQuadratureAndBound) {
  const int n = 8;
  const double t = 0.5;
  // trapezoid in r of the once-integrated kernel, which is smooth
  const int m = 4000;
  double acc = 0;
  for (int i = 0; i <= m; ++i) {
    const double r = t * i / m;
    double inner = 0;
    for (int l = 1; l < n; ++l) {
      const double lam = dirichlet_eigenvalue(l, n);
      inner += (1 - std::exp(-lam * r)) / lam * dirichlet_eigenvector(l, 1, n) * dirichlet_eigenvector(l, 1, n);
    }
    acc += (i == 0 || i == m ? 0.5 : 1.0) * inner;
  }
  acc *= t / m;
  EXPECT_NEAR(double_time_integral(1, t, n), acc, 1e-8);
  for (int nn : {8, 16, 32, 64})
    for (double tt : {0.5, 1.0, 2.0}) EXPECT_LE(double_time_integral(1, tt, nn), 2 * tt / (nn * nn));
}

TEST(CosineSum, Vanishes) {
  for (int n : {2, 5, 64, 128}) EXPECT_LE(std::abs(cosine_sum_check(n)), 1e-12);
}

TEST(GradientCheck, BoundedAndZeroWhenFlat) {
  const std::vector<double> ts{0.0, 0.05, 0.5};
  auto rho0 = [](double u) { return 0.1 + 3.2 * u * (1 - u); };
  const double base = discrete_gradient_check({16, 0.5, 0.1, 0.1}, sample_profile({16, 0.5, 0.1, 0.1}, rho0), ts).scaled_max;
  for (int n : {32, 64}) {
    SystemParams p{n, 0.5, 0.1, 0.1};
    EXPECT_LE(discrete_gradient_check(p, sample_profile(p, rho0), ts).scaled_max, 1.2 * base);
  }
  SystemParams flat{16, 1.0, 0.3, 0.3};
  EXPECT_LE(discrete_gradient_check(flat, sample_profile(flat, [](double) { return 0.3; }), ts).scaled_max, 1e-13);
  SystemParams st{32, 0.0, 0.2, 0.8};
  EXPECT_LE(discrete_gradient_check(st, stationary_profile(st), ts).scaled_max, 0.6 * 32 / 30 + 1e-12);
}

}  // namespace
}  // namespace sseplab
