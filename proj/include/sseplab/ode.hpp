#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>

namespace sseplab {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-15;
  std::size_t max_steps = 100'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_calls = 0;
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

// Stability caps for explicit stepping of the lattice generators.
inline double step_cap_1d(int n) { return 0.9 * 2.0 / (8.0 * n * n); }
inline double step_cap_2d(int n) { return 0.9 * 2.0 / (16.0 * n * n); }

// Adaptive Dormand-Prince 5(4) with FSAL; error measured in the max norm.
class DormandPrince {
 public:
  DormandPrince(OdeRhs rhs, OdeOptions opts);

  // Advances y from t0 to t1 in place.
  void integrate(Eigen::VectorXd& y, double t0, double t1);

  const OdeStats& stats() const { return stats_; }

 private:
  OdeRhs rhs_;
  OdeOptions opts_;
  OdeStats stats_;
  double h_ = 0.0;  // last accepted step, reused across calls
  Eigen::VectorXd k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
};

}  // namespace sseplab
