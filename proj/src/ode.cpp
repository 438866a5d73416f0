#include "sseplab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sseplab {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

DormandPrince::DormandPrince(OdeRhs rhs, OdeOptions opts) : rhs_(std::move(rhs)), opts_(opts) {}

void DormandPrince::integrate(Eigen::VectorXd& y, double t0, double t1) {
  if (t1 < t0) throw std::invalid_argument("integrate: t1 < t0");
  if (t1 == t0) return;
  const Eigen::Index m = y.size();
  for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_}) v->resize(m);

  double t = t0;
  rhs_(t, y, k1_);
  ++stats_.rhs_calls;

  double h = h_;
  if (h <= 0.0) {
    const double scale = opts_.abs_tol + opts_.rel_tol * y.cwiseAbs().maxCoeff();
    const double d1 = k1_.cwiseAbs().maxCoeff();
    h = d1 > 0 ? 0.01 * scale / d1 : 1e-6;
    h = std::max(h, 1e-3 * std::min(opts_.max_step, t1 - t0));
  }

  std::size_t steps = 0;
  while (t < t1) {
    h = std::min({h, opts_.max_step, t1 - t});
    const bool last = (t + h >= t1);
    if (++steps > opts_.max_steps) throw IntegrationError("integrate: step budget exhausted");

    tmp_ = y + h * a21 * k1_;
    rhs_(t + c2 * h, tmp_, k2_);
    tmp_ = y + h * (a31 * k1_ + a32 * k2_);
    rhs_(t + c3 * h, tmp_, k3_);
    tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    rhs_(t + c4 * h, tmp_, k4_);
    tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    rhs_(t + c5 * h, tmp_, k5_);
    tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    rhs_(t + h, tmp_, k6_);
    ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    const double tnew = last ? t1 : t + h;
    rhs_(tnew, ynew_, k7_);
    stats_.rhs_calls += 6;

    tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    double err = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double sc = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
      err = std::max(err, std::abs(tmp_[i]) / sc);
    }
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      t = tnew;
      y.swap(ynew_);
      k1_.swap(k7_);
      ++stats_.accepted;
      if (!last) h_ = h;
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++stats_.rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      if (h < opts_.min_step) {
        std::ostringstream os;
        os << "integrate: step size " << h << " fell below minimum at t=" << t;
        throw IntegrationError(os.str());
      }
    }
  }
}

}  // namespace sseplab
