#pragma once

#include "sseplab/operators.hpp"
#include "sseplab/params.hpp"
#include "sseplab/random.hpp"
#include "sseplab/stats.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace sseplab {

// Expected time a walk with the operator's (unscaled) rates spends in
// `target` before absorption.
struct OccupationProblem {
  DiscreteOperator op;
  std::vector<int> target;  // state indices, transient
  int start = 0;            // state index
};

struct OccupationSolution {
  Eigen::VectorXd times;  // per state, zero on absorbing states
  double residual = 0.0;  // max |-(A T) - 1_target| over transient states
};

OccupationSolution solve_occupation(const DiscreteOperator& op, std::span<const int> target);
double occupation_time(const OccupationProblem& problem);

// Diagonal D_n = {(x, x+1)} of the absorbed 2D walk, started at (x, y).
OccupationProblem diagonal_occupation(const SystemParams& p, int x, int y);

// Monte Carlo occupation time of the same walk.
MeanEstimate simulate_occupation(const OccupationProblem& problem, std::size_t walks, RandomSource source);

struct CouplingReport {
  // min over the grid of RHS - LHS
  double min_margin_diagonal = 0.0;  // P^theta(x,x) <= n^theta (P^0(1,x) + P^0(n-1,x)), x in {1, n-1}
  double min_margin_general = 0.0;   // three-term inequality for all (y, z)
  int worst_y = 0, worst_z = 0;
  double worst_t = 0.0;
  double first_violation_t = -1.0;  // earliest grid time with negative margin, -1 if none
  // same inequality for the kernels integrated twice in time, int_0^t (t-u) P_u du
  double min_margin_integrated = 0.0;
};

CouplingReport coupling_bound_check(const SystemParams& p, std::span<const double> times);

struct ReflectedReport {
  int n = 0;
  std::vector<double> times;
  std::vector<double> max_integral;  // max over starts of the occupation integral at each time
  double scaled_sup = 0.0;           // n * max over times and starts
};

// int_0^t P_x(X_s in {1, n-1}) ds for the reflected line walk (macroscopic time).
ReflectedReport reflected_occupation_bound_1d(int n, std::span<const double> times);
// int_0^t P_u(X_s in D_n) ds for the reflected triangle walk.
ReflectedReport reflected_occupation_bound_2d(int n, std::span<const double> times);

double holder_delta(double theta);
double holder_prefactor(double theta, int n);  // (C_n^theta)^2 n^theta
// (C_n^theta)^2 n^theta int_s^t int_s^r P^{n,0}_{r-u}(1, 1) du dr with tau = t - s
double holder_functional(double theta, int n, double tau);

struct HolderReport {
  double theta = 0.0;
  double delta = 0.0;
  double exponent = 0.0;  // fitted log-log slope of the envelope
  std::vector<double> taus;
  std::vector<double> envelope;  // max over n of holder_functional
};

// Fits the exponent of tau -> max_n holder_functional(theta, n, tau).
HolderReport holder_exponent_check(double theta, std::span<const int> ns, std::span<const double> taus);

}  // namespace sseplab
