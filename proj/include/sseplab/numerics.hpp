#pragma once

#include "sseplab/ode.hpp"
#include "sseplab/operators.hpp"
#include "sseplab/params.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace sseplab {

// rho_t^n on 0..n with values[0] = alpha, values[n] = beta.
struct ProfileVector {
  double time = 0.0;
  std::vector<double> values;

  int n() const { return static_cast<int>(values.size()) - 1; }
  double operator[](int x) const { return values[static_cast<std::size_t>(x)]; }
};

// phi_t^n on {0 <= x < y <= n}; zero on the absorbed lines x = 0, y = n.
class CorrelationField {
 public:
  CorrelationField() = default;
  CorrelationField(int n, double time);

  int n() const { return n_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  double operator()(int x, int y) const { return data_[idx(x, y)]; }
  double& at(int x, int y) { return data_[idx(x, y)]; }
  // symmetric access, x != y
  double sym(int x, int y) const { return x < y ? (*this)(x, y) : (*this)(y, x); }

  double max_abs() const;
  double max_abs_row(int x) const;  // max over y of |phi(x, y)| on V_n

  // interior V_n values in the transient order of the absorbed triangle walk
  Eigen::VectorXd interior(const DiscreteOperator& tri) const;
  void assign_interior(const DiscreteOperator& tri, const Eigen::VectorXd& v);

 private:
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(x * (n_ + 1) + y); }
  int n_ = 0;
  double time_ = 0.0;
  std::vector<double> data_;
};

ProfileVector stationary_profile(const SystemParams& p);
double hydro_stationary_profile(double u, double theta, double alpha, double beta);
CorrelationField stationary_correlation(const SystemParams& p);

// rho0(x/n) on interior sites, reservoir values at the ends.
ProfileVector sample_profile(const SystemParams& p, const std::function<double(double)>& rho0);

ProfileVector evolve_profile(const ProfileVector& rho0, const SystemParams& p, double t,
                             const OdeOptions& opts = {});
std::vector<ProfileVector> evolve_profile(const ProfileVector& rho0, const SystemParams& p,
                                          std::span<const double> times, const OdeOptions& opts = {});

// Closed-form solution of the linear profile equation through the
// eigendecomposition of the symmetric interior generator.
class ProfilePath {
 public:
  ProfilePath(const SystemParams& p, const ProfileVector& rho0);
  ProfileVector operator()(double t) const;
  void fill(double t, Eigen::VectorXd& full) const;  // 0..n, allocation-free

 private:
  SystemParams p_;
  double t0_ = 0.0;
  Eigen::VectorXd stationary_;  // interior
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd coeffs_;
};

using ProfileSupplier = std::function<ProfileVector(double)>;

// g(x, x+1) = -n^2 (rho(x+1) - rho(x))^2, zero elsewhere.
CorrelationField source_term(const ProfileVector& rho);

// Integrates d phi / dt = n^2 A phi + g on V_n from time phi0.time().
// phi0 is taken as given: no check that it comes from an admissible
// initial law is made.
CorrelationField evolve_correlation(const CorrelationField& phi0, const ProfileSupplier& rho,
                                    const SystemParams& p, double t, const OdeOptions& opts = {});
std::vector<CorrelationField> evolve_correlation(const CorrelationField& phi0, const ProfileSupplier& rho,
                                                 const SystemParams& p, std::span<const double> times,
                                                 const OdeOptions& opts = {});
std::vector<CorrelationField> evolve_correlation(const CorrelationField& phi0, const ProfilePath& rho,
                                                 const SystemParams& p, std::span<const double> times,
                                                 const OdeOptions& opts = {});

double profile_residual(const SystemParams& p, const ProfileVector& rho);  // max |n^2 B rho|
double correlation_residual(const SystemParams& p, const CorrelationField& phi,
                            const ProfileVector& rho);  // max |n^2 A phi + g|

// Discrete Dirichlet spectrum on Sigma_n.
double dirichlet_eigenvalue(int l, int n);
double dirichlet_eigenvector(int l, int x, int n);
double heat_kernel_dirichlet(int x, int y, double t, int n);

// Kernel P_t^{n,theta}(x, y), x, y in 1..n-1, by ODE integration of the
// absorbed 1D walk; one matrix per requested time (row x, column y).
std::vector<Eigen::MatrixXd> absorbed_kernel(const SystemParams& p, std::span<const double> times,
                                             const OdeOptions& opts = {});

double psi(double u);
double double_time_integral(int x, double t, int n);
double cosine_sum_check(int n);

struct GradientReport {
  double scaled_max = 0.0;  // max over grid of n * max_x |rho(x+1) - rho(x)|
  double time_at_max = 0.0;
};
GradientReport discrete_gradient_check(const SystemParams& p, const ProfileVector& rho0,
                                       std::span<const double> times);

}  // namespace sseplab
