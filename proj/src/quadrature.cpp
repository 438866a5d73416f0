#include "sseplab/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sseplab {

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
using Gauss = boost::math::quadrature::gauss<double, 15>;

struct Segment {
  double value, error, l1;
};

Segment rule(const std::function<double(double)>& f, double a, double b) {
  double l1 = 0;
  const double k = Kronrod::integrate(f, a, b, 0, 0.0, nullptr, &l1);
  const double g = Gauss::integrate(f, a, b);
  return {k, std::abs(k - g), l1};
}

// Bisect until the embedded Gauss rule agrees with Kronrod to the
// width-proportional share of the tolerance.
Segment adapt(const std::function<double(double)>& f, double a, double b, const Segment& whole, double density, int depth) {
  const double budget = density * (b - a);
  if (whole.error <= budget || whole.error <= 1e-15 * whole.l1 || depth == 0) return whole;
  const double mid = 0.5 * (a + b);
  const Segment l = adapt(f, a, mid, rule(f, a, mid), density, depth - 1);
  const Segment r = adapt(f, mid, b, rule(f, mid, b), density, depth - 1);
  return {l.value + r.value, l.error + r.error, l.l1 + r.l1};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol, int panels) {
  if (!(b >= a)) throw std::invalid_argument("integrate: need a <= b");
  if (a == b) return {};
  panels = std::max(panels, 1);
  const double w = (b - a) / panels;
  const double density = abs_tol / (b - a);
  QuadResult out;
  double l1 = 0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * w;
    const double hi = i + 1 == panels ? b : lo + w;
    const Segment s = adapt(f, lo, hi, rule(f, lo, hi), density, 30);
    out.value += s.value;
    out.error += s.error;
    l1 += s.l1;
  }
  if (out.error > abs_tol && out.error > 1e-14 * l1) {
    std::ostringstream os;
    os << "integrate: error estimate " << out.error << " exceeds tolerance " << abs_tol << " on [" << a << ", " << b << "]";
    throw QuadratureError(os.str());
  }
  return out;
}

}  // namespace sseplab
