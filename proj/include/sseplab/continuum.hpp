#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace sseplab {

enum class RegimeKind { Dirichlet, Robin, Neumann };

struct BoundaryRegime {
  RegimeKind kind = RegimeKind::Dirichlet;
  double mu = 1.0;  // Robin slope: f'(0) = mu f(0), f'(1) = -mu f(1)

  // theta < 1: Dirichlet, theta = 1: Robin, theta > 1: Neumann
  static BoundaryRegime for_theta(double theta, double mu = 1.0);
  std::string name() const;
};

struct RobinMode {
  int index = 0;  // m within its family, from 1
  bool symmetric = true;
  double root = 0.0;  // theta_m or omega_m
  double eigenvalue = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
};

struct RobinSpectrum {
  std::vector<RobinMode> symmetric;      // cot(theta) = 2 theta / mu
  std::vector<RobinMode> antisymmetric;  // tan(omega) = -2 omega / mu
  std::vector<RobinMode> merged;         // first K by eigenvalue
  bool interlaced = false;               // theta_m < omega_m < theta_{m+1}
};

// K roots of each family by bisection to 1e-12 inside the brackets
// [pi(m-1), pi(m-1/2)] and [pi(m-1/2), pi m].
RobinSpectrum robin_spectrum(double mu, int K);
std::vector<RobinMode> robin_eigenvalues(double mu, int K);

struct BasisValidation {
  double orthonormality = 0.0;    // max |int phi_j phi_k - delta_jk|
  double eigen_residual = 0.0;    // max |phi'' + lambda phi| / lambda on the check grid, finite differences
  double boundary_residual = 0.0;  // max boundary-condition defect
  bool ok = false;
};

// Composite 16-point Gauss-Legendre grid on [0, 1] resolving every product of
// two basis elements, with the basis tabulated on it.
struct QuadratureGrid {
  Eigen::VectorXd nodes, weights;
  Eigen::MatrixXd values, derivatives;  // nodes x modes
};

class ContinuumBasis {
 public:
  // Builds and validates; throws std::runtime_error on validation failure.
  static std::shared_ptr<const ContinuumBasis> build(BoundaryRegime regime, int K = 64);

  const BoundaryRegime& regime() const { return regime_; }
  int size() const { return static_cast<int>(modes_.size()); }
  double eigenvalue(int k) const { return modes_[static_cast<std::size_t>(k)].lambda; }
  double max_frequency() const;

  double value(int k, double u) const;
  double derivative(int k, double u) const;
  double second_derivative(int k, double u) const;

  const QuadratureGrid& grid() const { return grid_; }

  const BasisValidation& validation() const { return validation_; }
  BasisValidation validate() const;

 private:
  struct Mode {
    double lambda;
    double amp;
    double freq;
    double center;
    bool sine;  // amp * sin(freq (u - center)) instead of cos
  };
  explicit ContinuumBasis(BoundaryRegime r) : regime_(r) {}

  BoundaryRegime regime_;
  std::vector<Mode> modes_;
  QuadratureGrid grid_;
  BasisValidation validation_;
};

using BasisPtr = std::shared_ptr<const ContinuumBasis>;

// Finite combination of basis elements; membership in the regime's test
// space holds by construction.
class TestFunction {
 public:
  TestFunction(BasisPtr basis, Eigen::VectorXd coeffs);

  static TestFunction mode(BasisPtr basis, int k, double weight = 1.0);
  // L2 projection onto the basis by quadrature.
  static TestFunction project(BasisPtr basis, const std::function<double(double)>& f);

  const ContinuumBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }

  double operator()(double u) const;
  double derivative(double u) const;
  double second_derivative(double u) const;

  Eigen::VectorXd on_grid() const;
  Eigen::VectorXd derivative_on_grid() const;

  // max |c_k| e^{-lambda_k t} over the top quarter of the modes
  double tail_estimate(double t = 0.0) const;
  std::function<double(double)> as_function() const;

 private:
  BasisPtr basis_;
  Eigen::VectorXd coeffs_;
  std::vector<int> active_;
};

TestFunction semigroup_apply(const TestFunction& f, double t);
TestFunction laplacian(const TestFunction& f);
// Throws std::domain_error if f has mass on a zero eigenvalue.
TestFunction inverse_laplacian(const TestFunction& f);
double l2_inner(const TestFunction& f, const TestFunction& g);

// rho(r, u) = affine stationary part + sum_k c_k e^{-lambda_k r} phi_k(u).
class HydroProfile {
 public:
  // Closed-form stationary profile of the regime.
  static HydroProfile stationary(BasisPtr basis, double alpha, double beta);
  // Heat equation with the regime's boundary data started from rho0.
  static HydroProfile evolving(BasisPtr basis, double alpha, double beta, const std::function<double(double)>& rho0);

  double operator()(double r, double u) const;
  Eigen::VectorXd on_grid(double r) const;
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  bool is_stationary() const { return coeffs_.size() == 0 || coeffs_.cwiseAbs().maxCoeff() == 0.0; }

 private:
  BasisPtr basis_;
  double alpha_ = 0, beta_ = 0;
  double a0_ = 0, a1_ = 0;  // affine part a0 + a1 u
  Eigen::VectorXd coeffs_;
};

// Affine stationary profile of the regime (constant (alpha+beta)/2 for Neumann).
std::pair<double, double> stationary_affine(const BoundaryRegime& r, double alpha, double beta);

using CovarianceForm = std::function<double(const TestFunction&, const TestFunction&)>;
CovarianceForm equilibrium_form(double rho);                              // chi(rho) <f, g>
CovarianceForm local_gibbs_form(std::function<double(double)> rho0);      // int chi(rho0) f g

struct CovariancePrediction {
  double s = 0.0, t = 0.0;
  double value = 0.0;
  double initial_term = 0.0;    // sigma(T_t f, T_s g)
  double dynamical_term = 0.0;  // int_0^s <grad T_{t-r} f, grad T_{s-r} g>_{L2(rho_r)} dr
  double boundary_term = 0.0;   // Robin boundary noise, zero otherwise
  double tail_estimate = 0.0;
};

struct CovarianceOptions {
  double abs_tol = 1e-8;
};

CovariancePrediction ou_covariance(const TestFunction& f, const TestFunction& g, double s, double t,
                                   const HydroProfile& rho, const CovarianceForm& sigma,
                                   const CovarianceOptions& opts = {});

// Long-time covariance of the stationary fluctuation field.
double stationary_covariance(double theta, double alpha, double beta, const TestFunction& f, const TestFunction& g);

// Equal-time covariance matrix of a family and its minimum eigenvalue.
struct PsdReport {
  Eigen::MatrixXd matrix;
  double min_eigenvalue = 0.0;
};
PsdReport equal_time_covariance(const std::vector<TestFunction>& family, double t, const HydroProfile& rho,
                                const CovarianceForm& sigma, const CovarianceOptions& opts = {});

// int_0^t int 2 chi(rho(r,u)) (phi'(u))^2 du dr
double martingale_variance(const TestFunction& phi, double t, const HydroProfile& rho,
                           const CovarianceOptions& opts = {});

}  // namespace sseplab
