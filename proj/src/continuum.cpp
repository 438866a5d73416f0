#include "sseplab/continuum.hpp"

#include "sseplab/numerics.hpp"
#include "sseplab/params.hpp"
#include "sseplab/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sseplab {

namespace {

constexpr double kPi = std::numbers::pi;

double bisect(const std::function<double(double)>& h, double lo, double hi) {
  double flo = h(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = h(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

int panels_for(double freq) { return std::max(1, static_cast<int>(std::ceil(freq / kPi))); }

double grid_sum(const QuadratureGrid& g, const Eigen::VectorXd& v) { return g.weights.dot(v); }

}  // namespace

BoundaryRegime BoundaryRegime::for_theta(double theta, double mu) {
  if (theta < 0) throw std::invalid_argument("regime: theta must be >= 0");
  if (theta < 1.0) return {RegimeKind::Dirichlet, 0.0};
  if (theta == 1.0) {
    if (!(mu > 0)) throw std::invalid_argument("regime: Robin slope must be > 0");
    return {RegimeKind::Robin, mu};
  }
  return {RegimeKind::Neumann, 0.0};
}

std::string BoundaryRegime::name() const {
  switch (kind) {
    case RegimeKind::Dirichlet: return "dirichlet";
    case RegimeKind::Neumann: return "neumann";
    case RegimeKind::Robin: {
      std::ostringstream os;
      os << "robin(mu=" << mu << ")";
      return os.str();
    }
  }
  return "?";
}

RobinSpectrum robin_spectrum(double mu, int K) {
  if (!(mu > 0)) throw std::invalid_argument("robin_spectrum: mu must be > 0");
  if (K < 1) throw std::invalid_argument("robin_spectrum: K must be >= 1");
  RobinSpectrum sp;
  auto h = [mu](double th) { return std::cos(th) - (2.0 * th / mu) * std::sin(th); };
  auto k = [mu](double om) { return mu * std::sin(om) + 2.0 * om * std::cos(om); };
  for (int m = 1; m <= K; ++m) {
    const double lo = kPi * (m - 1), mid = kPi * (m - 0.5), hi = kPi * m;
    const double th = bisect(h, lo, mid);
    const double om = bisect(k, mid, hi);
    sp.symmetric.push_back({m, true, th, 4.0 * th * th, lo, mid});
    sp.antisymmetric.push_back({m, false, om, 4.0 * om * om, mid, hi});
  }
  sp.interlaced = true;
  for (int m = 0; m < K; ++m) {
    const double th = sp.symmetric[static_cast<std::size_t>(m)].root;
    const double om = sp.antisymmetric[static_cast<std::size_t>(m)].root;
    if (!(th < om)) sp.interlaced = false;
    if (m + 1 < K && !(om < sp.symmetric[static_cast<std::size_t>(m + 1)].root)) sp.interlaced = false;
  }
  std::vector<RobinMode> all(sp.symmetric);
  all.insert(all.end(), sp.antisymmetric.begin(), sp.antisymmetric.end());
  std::sort(all.begin(), all.end(), [](const RobinMode& a, const RobinMode& b) { return a.eigenvalue < b.eigenvalue; });
  all.resize(static_cast<std::size_t>(K));
  sp.merged = std::move(all);
  return sp;
}

std::vector<RobinMode> robin_eigenvalues(double mu, int K) { return robin_spectrum(mu, K).merged; }

std::shared_ptr<const ContinuumBasis> ContinuumBasis::build(BoundaryRegime regime, int K) {
  if (K < 1) throw std::invalid_argument("basis: K must be >= 1");
  auto b = std::shared_ptr<ContinuumBasis>(new ContinuumBasis(regime));
  const double r2 = std::sqrt(2.0);
  switch (regime.kind) {
    case RegimeKind::Dirichlet:
      for (int k = 1; k <= K; ++k) b->modes_.push_back({k * k * kPi * kPi, r2, k * kPi, 0.0, true});
      break;
    case RegimeKind::Neumann:
      b->modes_.push_back({0.0, 1.0, 0.0, 0.0, false});
      for (int k = 1; k < K; ++k) b->modes_.push_back({k * k * kPi * kPi, r2, k * kPi, 0.0, false});
      break;
    case RegimeKind::Robin:
      for (const auto& m : robin_eigenvalues(regime.mu, K)) {
        const double sq = std::sqrt(m.eigenvalue);
        const double ratio = std::sin(sq) / sq;
        const double amp = r2 / std::sqrt(m.symmetric ? 1.0 + ratio : 1.0 - ratio);
        b->modes_.push_back({m.eigenvalue, amp, 2.0 * m.root, 0.5, !m.symmetric});
      }
      break;
  }
  using GL = boost::math::quadrature::gauss<double, 16>;
  const int panels = panels_for(2.0 * b->max_frequency()) + 1;
  const auto& x = GL::abscissa();
  const auto& w = GL::weights();
  std::vector<double> nodes, weights;
  const double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = (p + 0.5) * h;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double wi = 0.5 * h * w[i];
      if (x[i] == 0.0) {
        nodes.push_back(c);
        weights.push_back(wi);
        continue;
      }
      nodes.push_back(c - 0.5 * h * x[i]);
      weights.push_back(wi);
      nodes.push_back(c + 0.5 * h * x[i]);
      weights.push_back(wi);
    }
  }
  QuadratureGrid& g = b->grid_;
  g.nodes = Eigen::Map<Eigen::VectorXd>(nodes.data(), static_cast<Eigen::Index>(nodes.size()));
  g.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  g.values.resize(g.nodes.size(), K);
  g.derivatives.resize(g.nodes.size(), K);
  for (int k = 0; k < K; ++k)
    for (Eigen::Index i = 0; i < g.nodes.size(); ++i) {
      g.values(i, k) = b->value(k, g.nodes[i]);
      g.derivatives(i, k) = b->derivative(k, g.nodes[i]);
    }
  b->validation_ = b->validate();
  if (!b->validation_.ok) {
    std::ostringstream os;
    os << "basis validation failed for " << regime.name() << ": orthonormality " << b->validation_.orthonormality
       << ", eigen residual " << b->validation_.eigen_residual << ", boundary " << b->validation_.boundary_residual;
    throw std::runtime_error(os.str());
  }
  return b;
}

double ContinuumBasis::max_frequency() const {
  double m = 0;
  for (const auto& md : modes_) m = std::max(m, md.freq);
  return m;
}

double ContinuumBasis::value(int k, double u) const {
  const Mode& m = modes_[static_cast<std::size_t>(k)];
  const double a = m.freq * (u - m.center);
  return m.amp * (m.sine ? std::sin(a) : std::cos(a));
}

double ContinuumBasis::derivative(int k, double u) const {
  const Mode& m = modes_[static_cast<std::size_t>(k)];
  const double a = m.freq * (u - m.center);
  return m.amp * m.freq * (m.sine ? std::cos(a) : -std::sin(a));
}

double ContinuumBasis::second_derivative(int k, double u) const { return -modes_[static_cast<std::size_t>(k)].freq * modes_[static_cast<std::size_t>(k)].freq * value(k, u); }

BasisValidation ContinuumBasis::validate() const {
  BasisValidation v;
  const int K = size();
  const Eigen::MatrixXd gram = grid_.values.transpose() * grid_.weights.asDiagonal() * grid_.values;
  v.orthonormality = (gram - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff();
  // adaptive cross-check on the lowest pairs, independent of the grid
  for (int j = 0; j < std::min(K, 4); ++j)
    for (int k = j; k < std::min(K, 4); ++k) {
      const double ip = integrate([&](double u) { return value(j, u) * value(k, u); }, 0.0, 1.0, 1e-12).value;
      v.orthonormality = std::max(v.orthonormality, std::abs(ip - (j == k ? 1.0 : 0.0)));
    }
  for (int k = 0; k < K; ++k) {
    const double lam = eigenvalue(k);
    if (lam == 0.0) {
      // constant mode: second difference must vanish
      for (int i = 0; i <= 100; ++i) {
        const double u = i / 100.0, h = 1e-3;
        v.eigen_residual = std::max(v.eigen_residual, std::abs(value(k, u + h) - 2 * value(k, u) + value(k, u - h)) / (h * h));
      }
      continue;
    }
    const double h = 1e-3 / std::sqrt(lam);
    for (int i = 0; i <= 100; ++i) {
      const double u = i / 100.0;
      const double fd = (value(k, u + h) - 2.0 * value(k, u) + value(k, u - h)) / (h * h);
      v.eigen_residual = std::max(v.eigen_residual, std::abs(fd + lam * value(k, u)) / lam);
    }
    double bc = 0;
    switch (regime_.kind) {
      case RegimeKind::Dirichlet: bc = std::max(std::abs(value(k, 0.0)), std::abs(value(k, 1.0))); break;
      case RegimeKind::Neumann: bc = std::max(std::abs(derivative(k, 0.0)), std::abs(derivative(k, 1.0))); break;
      case RegimeKind::Robin:
        bc = std::max(std::abs(derivative(k, 0.0) - regime_.mu * value(k, 0.0)),
                      std::abs(derivative(k, 1.0) + regime_.mu * value(k, 1.0)));
        break;
    }
    v.boundary_residual = std::max(v.boundary_residual, bc);
  }
  v.ok = v.orthonormality <= 1e-8 && v.eigen_residual <= 1e-6 && v.boundary_residual <= 1e-8;
  return v;
}

TestFunction::TestFunction(BasisPtr basis, Eigen::VectorXd coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  if (!basis_) throw std::invalid_argument("test function needs a basis");
  if (coeffs_.size() != basis_->size()) throw std::invalid_argument("coefficient count does not match basis size");
  for (int k = 0; k < basis_->size(); ++k)
    if (coeffs_[k] != 0.0) active_.push_back(k);
}

TestFunction TestFunction::mode(BasisPtr basis, int k, double weight) {
  if (k < 0 || k >= basis->size()) throw std::out_of_range("mode index outside basis");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis->size());
  c[k] = weight;
  return TestFunction(std::move(basis), std::move(c));
}

TestFunction TestFunction::project(BasisPtr basis, const std::function<double(double)>& f) {
  const QuadratureGrid& g = basis->grid();
  Eigen::VectorXd fw(g.nodes.size());
  for (Eigen::Index i = 0; i < fw.size(); ++i) fw[i] = f(g.nodes[i]) * g.weights[i];
  Eigen::VectorXd c = g.values.transpose() * fw;
  for (Eigen::Index k = 0; k < c.size(); ++k)
    if (std::abs(c[k]) < 1e-15) c[k] = 0.0;
  return TestFunction(std::move(basis), std::move(c));
}

double TestFunction::operator()(double u) const {
  double s = 0;
  for (int k : active_) s += coeffs_[k] * basis_->value(k, u);
  return s;
}

double TestFunction::derivative(double u) const {
  double s = 0;
  for (int k : active_) s += coeffs_[k] * basis_->derivative(k, u);
  return s;
}

double TestFunction::second_derivative(double u) const {
  double s = 0;
  for (int k : active_) s += coeffs_[k] * basis_->second_derivative(k, u);
  return s;
}

Eigen::VectorXd TestFunction::on_grid() const { return basis_->grid().values * coeffs_; }

Eigen::VectorXd TestFunction::derivative_on_grid() const { return basis_->grid().derivatives * coeffs_; }

double TestFunction::tail_estimate(double t) const {
  const int K = basis_->size();
  double m = 0;
  for (int k = K - std::max(1, K / 4); k < K; ++k) m = std::max(m, std::abs(coeffs_[k]) * std::exp(-basis_->eigenvalue(k) * t));
  return m;
}

std::function<double(double)> TestFunction::as_function() const {
  return [self = *this](double u) { return self(u); };
}

TestFunction semigroup_apply(const TestFunction& f, double t) {
  if (t < 0) throw std::invalid_argument("semigroup_apply: t must be >= 0");
  Eigen::VectorXd c = f.coefficients();
  for (int k = 0; k < c.size(); ++k) c[k] *= std::exp(-f.basis().eigenvalue(k) * t);
  return TestFunction(f.basis_ptr(), std::move(c));
}

TestFunction laplacian(const TestFunction& f) {
  Eigen::VectorXd c = f.coefficients();
  for (int k = 0; k < c.size(); ++k) c[k] *= -f.basis().eigenvalue(k);
  return TestFunction(f.basis_ptr(), std::move(c));
}

TestFunction inverse_laplacian(const TestFunction& f) {
  Eigen::VectorXd c = f.coefficients();
  for (int k = 0; k < c.size(); ++k) {
    const double lam = f.basis().eigenvalue(k);
    if (lam == 0.0) {
      if (std::abs(c[k]) > 1e-12) throw std::domain_error("inverse_laplacian: test function has mass on a zero mode");
      c[k] = 0.0;
    } else {
      c[k] /= lam;
    }
  }
  return TestFunction(f.basis_ptr(), std::move(c));
}

double l2_inner(const TestFunction& f, const TestFunction& g) {
  if (f.basis_ptr() != g.basis_ptr()) throw std::invalid_argument("l2_inner: test functions live in different bases");
  return f.coefficients().dot(g.coefficients());
}

std::pair<double, double> stationary_affine(const BoundaryRegime& r, double alpha, double beta) {
  switch (r.kind) {
    case RegimeKind::Dirichlet: return {alpha, beta - alpha};
    case RegimeKind::Neumann: return {0.5 * (alpha + beta), 0.0};
    case RegimeKind::Robin: {
      const double slope = r.mu * (beta - alpha) / (2.0 + r.mu);
      return {alpha + slope / r.mu, slope};
    }
  }
  return {0.0, 0.0};
}

HydroProfile HydroProfile::stationary(BasisPtr basis, double alpha, double beta) {
  HydroProfile h;
  h.alpha_ = alpha;
  h.beta_ = beta;
  std::tie(h.a0_, h.a1_) = stationary_affine(basis->regime(), alpha, beta);
  h.coeffs_ = Eigen::VectorXd::Zero(basis->size());
  h.basis_ = std::move(basis);
  return h;
}

HydroProfile HydroProfile::evolving(BasisPtr basis, double alpha, double beta, const std::function<double(double)>& rho0) {
  HydroProfile h;
  h.alpha_ = alpha;
  h.beta_ = beta;
  // Neumann conserves mass: the whole initial profile goes into the modes
  if (basis->regime().kind != RegimeKind::Neumann) std::tie(h.a0_, h.a1_) = stationary_affine(basis->regime(), alpha, beta);
  const double a0 = h.a0_, a1 = h.a1_;
  h.coeffs_ = TestFunction::project(basis, [&](double u) { return rho0(u) - a0 - a1 * u; }).coefficients();
  h.basis_ = std::move(basis);
  return h;
}

double HydroProfile::operator()(double r, double u) const {
  double v = a0_ + a1_ * u;
  for (int k = 0; k < coeffs_.size(); ++k)
    if (coeffs_[k] != 0.0) v += coeffs_[k] * std::exp(-basis_->eigenvalue(k) * r) * basis_->value(k, u);
  return v;
}

Eigen::VectorXd HydroProfile::on_grid(double r) const {
  const QuadratureGrid& g = basis_->grid();
  Eigen::VectorXd c = coeffs_;
  for (Eigen::Index k = 0; k < c.size(); ++k)
    if (c[k] != 0.0) c[k] *= std::exp(-basis_->eigenvalue(static_cast<int>(k)) * r);
  return (g.values * c).array() + a0_ + a1_ * g.nodes.array();
}

CovarianceForm equilibrium_form(double rho) {
  return [rho](const TestFunction& a, const TestFunction& b) { return chi(rho) * l2_inner(a, b); };
}

CovarianceForm local_gibbs_form(std::function<double(double)> rho0) {
  return [rho0 = std::move(rho0)](const TestFunction& a, const TestFunction& b) {
    const QuadratureGrid& g = a.basis().grid();
    Eigen::VectorXd w(g.nodes.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = chi(rho0(g.nodes[i]));
    return grid_sum(g, (w.array() * a.on_grid().array() * b.on_grid().array()).matrix());
  };
}

namespace {

// int 2 chi(rho(r, u)) a'(u) b'(u) du on the basis grid
double bulk_form(const HydroProfile& rho, double r, const TestFunction& a, const TestFunction& b) {
  const QuadratureGrid& g = a.basis().grid();
  const Eigen::ArrayXd pr = rho.on_grid(r).array();
  return grid_sum(g, (2.0 * pr * (1.0 - pr) * a.derivative_on_grid().array() * b.derivative_on_grid().array()).matrix());
}

}  // namespace

CovariancePrediction ou_covariance(const TestFunction& f, const TestFunction& g, double s, double t,
                                   const HydroProfile& rho, const CovarianceForm& sigma, const CovarianceOptions& opts) {
  if (s < 0 || t < s) throw std::invalid_argument("ou_covariance: need 0 <= s <= t");
  if (f.basis_ptr() != g.basis_ptr()) throw std::invalid_argument("ou_covariance: f and g must share a basis");
  CovariancePrediction out;
  out.s = s;
  out.t = t;
  out.initial_term = sigma(semigroup_apply(f, t), semigroup_apply(g, s));
  out.tail_estimate = std::max(f.tail_estimate(t), g.tail_estimate(s));

  if (s > 0) {
    auto inner = [&](double r) { return bulk_form(rho, r, semigroup_apply(f, t - r), semigroup_apply(g, s - r)); };
    // slowest decay rate in play sets the time panels
    double lam_max = 0;
    for (int k = 0; k < f.coefficients().size(); ++k)
      if (f.coefficients()[k] != 0.0 || g.coefficients()[k] != 0.0) lam_max = std::max(lam_max, f.basis().eigenvalue(k));
    const int tpanels = std::clamp(static_cast<int>(std::ceil(lam_max * s / 20.0)), 1, 64);
    out.dynamical_term = integrate(inner, 0.0, s, opts.abs_tol, tpanels).value;

    if (f.basis().regime().kind == RegimeKind::Robin) {
      const double al = rho.alpha(), be = rho.beta();
      auto bnd = [&](double r) {
        const TestFunction a = semigroup_apply(f, t - r);
        const TestFunction b = semigroup_apply(g, s - r);
        return a(0.0) * b(0.0) * (al + (1.0 - 2.0 * al) * rho(r, 0.0)) +
               a(1.0) * b(1.0) * (be + (1.0 - 2.0 * be) * rho(r, 1.0));
      };
      out.boundary_term = integrate(bnd, 0.0, s, opts.abs_tol, tpanels).value;
    }
  }
  out.value = out.initial_term + out.dynamical_term + out.boundary_term;
  return out;
}

double stationary_covariance(double theta, double alpha, double beta, const TestFunction& f, const TestFunction& g) {
  const BoundaryRegime reg = BoundaryRegime::for_theta(theta, f.basis().regime().mu);
  if (reg.kind != f.basis().regime().kind || f.basis_ptr() != g.basis_ptr())
    throw std::invalid_argument("stationary_covariance: test functions must live in the regime's basis");
  if (reg.kind == RegimeKind::Robin && f.basis().regime().mu != 1.0)
    throw std::invalid_argument("stationary_covariance: theta = 1 needs the Robin basis with mu = 1");
  const QuadratureGrid& grid = f.basis().grid();
  Eigen::VectorXd w(grid.nodes.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = chi(hydro_stationary_profile(grid.nodes[i], theta, alpha, beta));
  const double bulk = grid_sum(grid, (w.array() * f.on_grid().array() * g.on_grid().array()).matrix());
  const double inv = l2_inner(inverse_laplacian(f), g);
  if (theta != 1.0) return bulk - (beta - alpha) * (beta - alpha) * inv;

  const double d = (beta - alpha) / 3.0;
  const auto& B = f.basis();
  const Eigen::VectorXd& fc = f.coefficients();
  const Eigen::VectorXd& gc = g.coefficients();
  double at1 = 0, at0 = 0;
  for (int j = 0; j < fc.size(); ++j) {
    if (fc[j] == 0.0) continue;
    for (int k = 0; k < gc.size(); ++k) {
      if (gc[k] == 0.0) continue;
      const double den = B.eigenvalue(j) + B.eigenvalue(k);
      at1 += fc[j] * gc[k] * B.value(j, 1.0) * B.value(k, 1.0) / den;
      at0 += fc[j] * gc[k] * B.value(j, 0.0) * B.value(k, 0.0) / den;
    }
  }
  return bulk - d * d * inv + 2.0 * (2.0 * beta + alpha) * (2.0 * beta - 1.0) / 3.0 * at1 +
         2.0 * (beta + 2.0 * alpha) * (2.0 * alpha - 1.0) / 3.0 * at0;
}

PsdReport equal_time_covariance(const std::vector<TestFunction>& family, double t, const HydroProfile& rho,
                                const CovarianceForm& sigma, const CovarianceOptions& opts) {
  const auto m = static_cast<Eigen::Index>(family.size());
  PsdReport rep;
  rep.matrix.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const double v = ou_covariance(family[static_cast<std::size_t>(i)], family[static_cast<std::size_t>(j)], t, t, rho,
                                     sigma, opts).value;
      rep.matrix(i, j) = rep.matrix(j, i) = v;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.matrix, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = m ? es.eigenvalues().minCoeff() : 0.0;
  return rep;
}

double martingale_variance(const TestFunction& phi, double t, const HydroProfile& rho, const CovarianceOptions& opts) {
  if (t < 0) throw std::invalid_argument("martingale_variance: t must be >= 0");
  if (t == 0) return 0.0;
  return integrate([&](double r) { return bulk_form(rho, r, phi, phi); }, 0.0, t, opts.abs_tol).value;
}

}  // namespace sseplab
