#include "sseplab/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sseplab {

CorrelationField::CorrelationField(int n, double time)
    : n_(n), time_(time), data_(static_cast<std::size_t>((n + 1) * (n + 1)), 0.0) {}

double CorrelationField::max_abs() const {
  double m = 0;
  for (int x = 1; x < n_; ++x)
    for (int y = x + 1; y < n_; ++y) m = std::max(m, std::abs((*this)(x, y)));
  return m;
}

double CorrelationField::max_abs_row(int x) const {
  double m = 0;
  for (int y = 1; y < n_; ++y)
    if (y != x) m = std::max(m, std::abs(sym(x, y)));
  return m;
}

Eigen::VectorXd CorrelationField::interior(const DiscreteOperator& tri) const {
  const auto& tr = tri.transient();
  Eigen::VectorXd v(static_cast<Eigen::Index>(tr.size()));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    auto [x, y] = tri.coords(tr[i]);
    v[static_cast<Eigen::Index>(i)] = (*this)(x, y);
  }
  return v;
}

void CorrelationField::assign_interior(const DiscreteOperator& tri, const Eigen::VectorXd& v) {
  const auto& tr = tri.transient();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    auto [x, y] = tri.coords(tr[i]);
    at(x, y) = v[static_cast<Eigen::Index>(i)];
  }
}

ProfileVector stationary_profile(const SystemParams& p) {
  p.validate();
  const double nt = p.n_pow_theta();
  const double a = (p.beta - p.alpha) / (2.0 * nt + p.n - 2.0);
  const double b = a * (nt - 1.0) + p.alpha;
  ProfileVector r;
  r.values.resize(static_cast<std::size_t>(p.n + 1));
  r.values.front() = p.alpha;
  r.values.back() = p.beta;
  for (int x = 1; x < p.n; ++x) r.values[static_cast<std::size_t>(x)] = a * x + b;
  return r;
}

double hydro_stationary_profile(double u, double theta, double alpha, double beta) {
  if (theta < 1.0) return (beta - alpha) * u + alpha;
  if (theta == 1.0) return (beta - alpha) * u / 3.0 + alpha + (beta - alpha) / 3.0;
  return 0.5 * (alpha + beta);
}

CorrelationField stationary_correlation(const SystemParams& p) {
  p.validate();
  const double nt = p.n_pow_theta();
  const double d1 = 2.0 * nt + p.n - 2.0;
  const double d2 = 2.0 * nt + p.n - 3.0;
  const double c = -(p.alpha - p.beta) * (p.alpha - p.beta) / (d1 * d1 * d2);
  CorrelationField phi(p.n, 0.0);
  for (int x = 1; x < p.n; ++x)
    for (int y = x + 1; y < p.n; ++y) phi.at(x, y) = c * (x + nt - 1.0) * (p.n - y + nt - 1.0);
  return phi;
}

ProfileVector sample_profile(const SystemParams& p, const std::function<double(double)>& rho0) {
  ProfileVector r;
  r.values.resize(static_cast<std::size_t>(p.n + 1));
  r.values.front() = p.alpha;
  r.values.back() = p.beta;
  for (int x = 1; x < p.n; ++x) r.values[static_cast<std::size_t>(x)] = rho0(static_cast<double>(x) / p.n);
  return r;
}

namespace {

void check_profile(const ProfileVector& rho, const SystemParams& p) {
  if (rho.n() != p.n) throw std::invalid_argument("profile size does not match n");
  if (rho.values.front() != p.alpha || rho.values.back() != p.beta)
    throw std::invalid_argument("profile must carry reservoir values at 0 and n");
}

// Interior drift n^2 B rho = M rho + c.
struct ProfileSystem {
  SparseRowMatrix m;
  Eigen::VectorXd c;

  explicit ProfileSystem(const SystemParams& p) {
    const auto op = DiscreteOperator::absorbed_line(p);
    m = op.transient_generator(p.n_sq());
    c = Eigen::VectorXd::Zero(p.n - 1);
    const double edge = p.n_sq() * p.slow_factor();
    c[0] += edge * p.alpha;
    c[p.n - 2] += edge * p.beta;
  }
};

Eigen::VectorXd interior_of(const ProfileVector& r) {
  return Eigen::Map<const Eigen::VectorXd>(r.values.data() + 1, r.n() - 1);
}

ProfileVector full_of(const Eigen::VectorXd& v, const SystemParams& p, double t) {
  ProfileVector r;
  r.time = t;
  r.values.resize(static_cast<std::size_t>(p.n + 1));
  r.values.front() = p.alpha;
  r.values.back() = p.beta;
  for (int x = 1; x < p.n; ++x) r.values[static_cast<std::size_t>(x)] = v[x - 1];
  return r;
}

OdeOptions capped(OdeOptions o, double cap) {
  o.max_step = std::min(o.max_step, cap);
  return o;
}

}  // namespace

std::vector<ProfileVector> evolve_profile(const ProfileVector& rho0, const SystemParams& p,
                                          std::span<const double> times, const OdeOptions& opts) {
  p.validate();
  check_profile(rho0, p);
  const ProfileSystem sys(p);
  DormandPrince dp(
      [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy.noalias() = sys.m * y + sys.c; },
      capped(opts, step_cap_1d(p.n)));
  Eigen::VectorXd y = interior_of(rho0);
  double t = rho0.time;
  std::vector<ProfileVector> out;
  for (double target : times) {
    if (target < t) throw std::invalid_argument("evolve_profile: times must be nondecreasing");
    dp.integrate(y, t, target);
    t = target;
    out.push_back(full_of(y, p, t));
  }
  return out;
}

ProfileVector evolve_profile(const ProfileVector& rho0, const SystemParams& p, double t, const OdeOptions& opts) {
  const double target = rho0.time + t;
  return evolve_profile(rho0, p, std::span<const double>(&target, 1), opts).front();
}

ProfilePath::ProfilePath(const SystemParams& p, const ProfileVector& rho0) : p_(p) {
  p.validate();
  check_profile(rho0, p);
  const ProfileSystem sys(p);
  const Eigen::MatrixXd m(sys.m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("ProfilePath: eigendecomposition failed");
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
  stationary_ = interior_of(stationary_profile(p));
  coeffs_ = eigenvectors_.transpose() * (interior_of(rho0) - stationary_);
  t0_ = rho0.time;
}

void ProfilePath::fill(double t, Eigen::VectorXd& full) const {
  full.resize(p_.n + 1);
  full[0] = p_.alpha;
  full[p_.n] = p_.beta;
  full.segment(1, p_.n - 1) =
      stationary_ + eigenvectors_ * (coeffs_.array() * (eigenvalues_.array() * (t - t0_)).exp()).matrix();
}

ProfileVector ProfilePath::operator()(double t) const {
  Eigen::VectorXd full;
  fill(t, full);
  ProfileVector r;
  r.time = t;
  r.values.assign(full.data(), full.data() + full.size());
  return r;
}

CorrelationField source_term(const ProfileVector& rho) {
  const int n = rho.n();
  CorrelationField g(n, rho.time);
  for (int x = 1; x + 1 < n; ++x) {
    const double d = rho[x + 1] - rho[x];
    g.at(x, x + 1) = -static_cast<double>(n) * n * d * d;
  }
  return g;
}

namespace {

using FullProfileFill = std::function<void(double, Eigen::VectorXd&)>;

std::vector<CorrelationField> evolve_correlation_impl(const CorrelationField& phi0, const FullProfileFill& fill,
                                                      const SystemParams& p, std::span<const double> times,
                                                      const OdeOptions& opts) {
  p.validate();
  if (phi0.n() != p.n) throw std::invalid_argument("evolve_correlation: field size does not match n");
  const auto tri = DiscreteOperator::absorbed_triangle(p);
  const SparseRowMatrix m = tri.transient_generator(p.n_sq());
  std::vector<Eigen::Index> diag(static_cast<std::size_t>(std::max(0, p.n - 2)));
  for (int x = 1; x + 1 < p.n; ++x) diag[static_cast<std::size_t>(x - 1)] = tri.transient_index(tri.state_of(x, x + 1));
  const double n2 = p.n_sq();
  Eigen::VectorXd rho(p.n + 1);

  DormandPrince dp(
      [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        dy.noalias() = m * y;
        fill(t, rho);
        for (int x = 1; x + 1 < p.n; ++x) {
          const double d = rho[x + 1] - rho[x];
          dy[diag[static_cast<std::size_t>(x - 1)]] -= n2 * d * d;
        }
      },
      capped(opts, step_cap_2d(p.n)));

  Eigen::VectorXd y = phi0.interior(tri);
  double t = phi0.time();
  std::vector<CorrelationField> out;
  for (double target : times) {
    if (target < t) throw std::invalid_argument("evolve_correlation: times must be nondecreasing");
    dp.integrate(y, t, target);
    t = target;
    CorrelationField f(p.n, t);
    f.assign_interior(tri, y);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

std::vector<CorrelationField> evolve_correlation(const CorrelationField& phi0, const ProfileSupplier& rho,
                                                 const SystemParams& p, std::span<const double> times,
                                                 const OdeOptions& opts) {
  FullProfileFill fill = [&](double t, Eigen::VectorXd& full) {
    const ProfileVector r = rho(t);
    if (r.n() != p.n) throw std::invalid_argument("profile supplier returned wrong size");
    full = Eigen::Map<const Eigen::VectorXd>(r.values.data(), p.n + 1);
  };
  return evolve_correlation_impl(phi0, fill, p, times, opts);
}

std::vector<CorrelationField> evolve_correlation(const CorrelationField& phi0, const ProfilePath& rho,
                                                 const SystemParams& p, std::span<const double> times,
                                                 const OdeOptions& opts) {
  FullProfileFill fill = [&](double t, Eigen::VectorXd& full) { rho.fill(t, full); };
  return evolve_correlation_impl(phi0, fill, p, times, opts);
}

CorrelationField evolve_correlation(const CorrelationField& phi0, const ProfileSupplier& rho, const SystemParams& p,
                                    double t, const OdeOptions& opts) {
  const double target = phi0.time() + t;
  return evolve_correlation(phi0, rho, p, std::span<const double>(&target, 1), opts).front();
}

double profile_residual(const SystemParams& p, const ProfileVector& rho) {
  check_profile(rho, p);
  const ProfileSystem sys(p);
  const Eigen::VectorXd r = sys.m * interior_of(rho) + sys.c;
  return r.cwiseAbs().maxCoeff();
}

double correlation_residual(const SystemParams& p, const CorrelationField& phi, const ProfileVector& rho) {
  const auto tri = DiscreteOperator::absorbed_triangle(p);
  const SparseRowMatrix m = tri.transient_generator(p.n_sq());
  Eigen::VectorXd r = m * phi.interior(tri);
  r += source_term(rho).interior(tri);
  return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

double dirichlet_eigenvalue(int l, int n) {
  const double s = std::sin(std::numbers::pi * l / (2.0 * n));
  return 4.0 * n * n * s * s;
}

double dirichlet_eigenvector(int l, int x, int n) {
  return std::sqrt(2.0 / n) * std::sin(std::numbers::pi * l * x / n);
}

double heat_kernel_dirichlet(int x, int y, double t, int n) {
  if (x < 1 || x >= n || y < 1 || y >= n) throw std::invalid_argument("heat_kernel_dirichlet: sites must be in 1..n-1");
  double s = 0;
  for (int l = 1; l < n; ++l)
    s += std::exp(-dirichlet_eigenvalue(l, n) * t) * dirichlet_eigenvector(l, x, n) * dirichlet_eigenvector(l, y, n);
  return s;
}

std::vector<Eigen::MatrixXd> absorbed_kernel(const SystemParams& p, std::span<const double> times,
                                             const OdeOptions& opts) {
  p.validate();
  const int m = p.n - 1;
  const SparseRowMatrix q = DiscreteOperator::absorbed_line(p).transient_generator(p.n_sq());
  DormandPrince dp(
      [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        Eigen::Map<const Eigen::MatrixXd> ym(y.data(), m, m);
        Eigen::Map<Eigen::MatrixXd> dm(dy.data(), m, m);
        dm.noalias() = q * ym;
      },
      capped(opts, step_cap_1d(p.n)));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m) * m);
  for (int i = 0; i < m; ++i) y[static_cast<Eigen::Index>(i) * m + i] = 1.0;
  double t = 0;
  std::vector<Eigen::MatrixXd> out;
  for (double target : times) {
    if (target < t) throw std::invalid_argument("absorbed_kernel: times must be nondecreasing");
    dp.integrate(y, t, target);
    t = target;
    // q symmetric: column-major storage of q^k applied to I is the kernel itself
    out.emplace_back(Eigen::Map<const Eigen::MatrixXd>(y.data(), m, m));
  }
  return out;
}

double psi(double u) {
  if (u < 0) throw std::invalid_argument("psi: u must be >= 0");
  if (u < 1e-4) return 0.5 - u / 6.0 + u * u / 24.0 - u * u * u / 120.0;
  if (u < 1.0) {
    // sum_k (-u)^k / (k+2)!
    double term = 0.5, sum = 0.5;
    for (int k = 1; k < 40 && std::abs(term) > 1e-18; ++k) {
      term *= -u / (k + 2);
      sum += term;
    }
    return sum;
  }
  return (std::expm1(-u) + u) / (u * u);
}

double double_time_integral(int x, double t, int n) {
  double s = 0;
  for (int l = 1; l < n; ++l)
    s += t * t * psi(dirichlet_eigenvalue(l, n) * t) * dirichlet_eigenvector(l, x, n) * dirichlet_eigenvector(l, 1, n);
  return s;
}

double cosine_sum_check(int n) {
  if (n < 2) throw std::invalid_argument("cosine_sum_check: n must be >= 2");
  double s = 0;
  for (int l = 1; l < n; ++l) s += std::cos(l * std::numbers::pi / n);
  return s;
}

GradientReport discrete_gradient_check(const SystemParams& p, const ProfileVector& rho0,
                                       std::span<const double> times) {
  GradientReport rep;
  auto scaled = [&](const ProfileVector& r) {
    double m = 0;
    for (int x = 1; x + 1 < p.n; ++x) m = std::max(m, std::abs(r[x + 1] - r[x]));
    return p.n * m;
  };
  for (const auto& r : evolve_profile(rho0, p, times)) {
    const double v = scaled(r);
    if (v > rep.scaled_max) {
      rep.scaled_max = v;
      rep.time_at_max = r.time;
    }
  }
  return rep;
}

}  // namespace sseplab
