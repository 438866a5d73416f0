#pragma once

#include <functional>
#include <stdexcept>

namespace sseplab {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (31 points, embedded 15-point Gauss error estimate)
// over [a, b] split into `panels` equal pieces;
// throws QuadratureError when the estimated error exceeds abs_tol.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-10,
                     int panels = 1);

}  // namespace sseplab
