#pragma once

#include "sseplab/numerics.hpp"
#include "sseplab/params.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <span>

namespace sseplab {

inline constexpr int kOracleMaxN = 14;

// Law over {0,1}^(n-1); state index carries site x in bit x-1.
struct MasterState {
  int n = 0;
  Eigen::VectorXd probs;

  static MasterState point(const Configuration& c);
  static MasterState product(std::span<const double> marginals);  // P(eta(x)=1) = marginals[x-1]
  double total() const { return probs.sum(); }
};

// Generator with the n^2 speed-up, row-major Q(i, j) = rate i -> j.
SparseRowMatrix build_full_generator(const SystemParams& p);

MasterState stationary_distribution(const SystemParams& p, double* residual = nullptr);

struct EvolveOptions {
  double chunk = 20.0;     // max Lambda * dt per uniformization chunk
  double tail_tol = 1e-14;  // Poisson tail mass dropped per chunk
};

// pi_t = pi_0 exp(tQ) by uniformization; also valid for signed measures.
Eigen::VectorXd evolve_measure(const Eigen::VectorXd& v0, const SparseRowMatrix& q, double t,
                               const EvolveOptions& opts = {});
MasterState evolve_distribution(const MasterState& s0, const SystemParams& p, double t,
                                const EvolveOptions& opts = {});

struct ExactObservables {
  ProfileVector profile;
  CorrelationField correlation;
};
ExactObservables exact_observables(const MasterState& s, const SystemParams& p);

double expectation(const MasterState& s, const std::function<double(const Configuration&)>& f);

// E[Y(f)^2] with Y(f) = n^{-1/2} sum f(x/n)(eta(x) - rho(x)), by enumeration.
double field_second_moment(const MasterState& s, const std::function<double(double)>& f);
// Same from one- and two-point functions.
double field_second_moment(const ExactObservables& obs, const std::function<double(double)>& f);

// max_y |space-time correlation - kernel representation| for the law
// started from `initial` at time 0, with times 0 <= s <= r.
double duhamel_check(const SystemParams& p, double s, double r, int x, const MasterState& initial);

struct PartitionCheck {
  double gamma_ratio = 0.0;  // Gamma(2n^theta + n - 1) / Gamma(2n^theta)
  double chain_product = 0.0;  // prod_{k=0}^{n-2} (2n^theta + k)
  double relative_error = 0.0;
  double stationary_consistency = 0.0;  // max deviation of oracle 1/2-point functions from closed forms
};
PartitionCheck partition_function_check(const SystemParams& p);

}  // namespace sseplab
