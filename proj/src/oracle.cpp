#include "sseplab/oracle.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sseplab {

namespace {

void guard_size(int n, int limit) {
  if (n < 3 || n > limit)
    throw std::invalid_argument("oracle: n must lie in [3, " + std::to_string(limit) + "], got " + std::to_string(n));
}

inline int bit(std::uint64_t s, int x) { return static_cast<int>((s >> (x - 1)) & 1u); }

}  // namespace

MasterState MasterState::point(const Configuration& c) {
  MasterState m;
  m.n = c.lattice_size();
  guard_size(m.n, kOracleMaxN);
  m.probs = Eigen::VectorXd::Zero(Eigen::Index{1} << (m.n - 1));
  m.probs[static_cast<Eigen::Index>(c.to_index())] = 1.0;
  return m;
}

MasterState MasterState::product(std::span<const double> marginals) {
  MasterState m;
  m.n = static_cast<int>(marginals.size()) + 1;
  guard_size(m.n, kOracleMaxN);
  const Eigen::Index states = Eigen::Index{1} << (m.n - 1);
  m.probs.resize(states);
  for (Eigen::Index s = 0; s < states; ++s) {
    double w = 1.0;
    for (int x = 1; x < m.n; ++x) {
      const double q = marginals[static_cast<std::size_t>(x - 1)];
      w *= bit(static_cast<std::uint64_t>(s), x) ? q : 1.0 - q;
    }
    m.probs[s] = w;
  }
  return m;
}

SparseRowMatrix build_full_generator(const SystemParams& p) {
  p.validate();
  guard_size(p.n, kOracleMaxN);
  const int n = p.n;
  const double n2 = p.n_sq();
  const double edge = n2 * p.slow_factor();
  const std::uint64_t states = std::uint64_t{1} << (n - 1);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(states) * static_cast<std::size_t>(n + 1));
  for (std::uint64_t s = 0; s < states; ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    double out = 0;
    auto add = [&](std::uint64_t to, double rate) {
      trip.emplace_back(i, static_cast<Eigen::Index>(to), rate);
      out += rate;
    };
    for (int x = 1; x + 1 < n; ++x)
      if (bit(s, x) != bit(s, x + 1)) add(s ^ (std::uint64_t{3} << (x - 1)), n2);
    add(s ^ 1u, edge * (bit(s, 1) ? 1.0 - p.alpha : p.alpha));
    add(s ^ (std::uint64_t{1} << (n - 2)), edge * (bit(s, n - 1) ? 1.0 - p.beta : p.beta));
    trip.emplace_back(i, i, -out);
  }
  SparseRowMatrix q(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
  q.setFromTriplets(trip.begin(), trip.end());
  return q;
}

MasterState stationary_distribution(const SystemParams& p, double* residual) {
  const SparseRowMatrix q = build_full_generator(p);
  const Eigen::Index m = q.rows();
  // Q^T pi = 0 with the last equation replaced by sum(pi) = 1
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < m; ++i)
    for (SparseRowMatrix::InnerIterator it(q, i); it; ++it)
      if (it.col() != m - 1) trip.emplace_back(it.col(), i, it.value());
  for (Eigen::Index j = 0; j < m; ++j) trip.emplace_back(m - 1, j, 1.0);
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary_distribution: factorization failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs[m - 1] = 1.0;
  MasterState st;
  st.n = p.n;
  st.probs = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary_distribution: solve failed");
  const Eigen::VectorXd r = q.transpose() * st.probs;
  const double res = r.cwiseAbs().maxCoeff();
  if (residual) *residual = res;
  if (!(res <= 1e-9 * std::max(1.0, p.n_sq()))) throw std::runtime_error("stationary_distribution: residual too large");
  return st;
}

Eigen::VectorXd evolve_measure(const Eigen::VectorXd& v0, const SparseRowMatrix& q, double t,
                               const EvolveOptions& opts) {
  if (t < 0) throw std::invalid_argument("evolve_measure: t must be >= 0");
  if (t == 0) return v0;
  const SparseRowMatrix qt = q.transpose();
  double lambda = 0;
  for (Eigen::Index i = 0; i < q.rows(); ++i) lambda = std::max(lambda, -q.coeff(i, i));
  if (lambda == 0) return v0;
  const auto chunks = static_cast<long>(std::ceil(lambda * t / opts.chunk));
  const double dt = t / static_cast<double>(chunks);
  const double a = lambda * dt;
  Eigen::VectorXd v = v0, term(v0.size()), acc(v0.size()), tmp(v0.size());
  for (long c = 0; c < chunks; ++c) {
    term = v;
    double w = std::exp(-a);
    double mass = w;
    acc = w * term;
    for (int k = 1; k < 10000; ++k) {
      tmp.noalias() = qt * term;
      term += tmp / lambda;
      w *= a / k;
      mass += w;
      acc += w * term;
      if (k > a && 1.0 - mass < opts.tail_tol) break;
    }
    v.swap(acc);
  }
  return v;
}

MasterState evolve_distribution(const MasterState& s0, const SystemParams& p, double t, const EvolveOptions& opts) {
  guard_size(p.n, 12);
  if (s0.n != p.n) throw std::invalid_argument("evolve_distribution: state size does not match n");
  MasterState out;
  out.n = p.n;
  out.probs = evolve_measure(s0.probs, build_full_generator(p), t, opts);
  return out;
}

ExactObservables exact_observables(const MasterState& s, const SystemParams& p) {
  if (s.n != p.n) throw std::invalid_argument("exact_observables: state size does not match n");
  const int n = p.n;
  const std::size_t w = static_cast<std::size_t>(n + 1);
  std::vector<double> one(w, 0.0), two(w * w, 0.0);
  for (Eigen::Index i = 0; i < s.probs.size(); ++i) {
    const double pi = s.probs[i];
    if (pi == 0.0) continue;
    const auto st = static_cast<std::uint64_t>(i);
    for (int x = 1; x < n; ++x) {
      if (!bit(st, x)) continue;
      one[static_cast<std::size_t>(x)] += pi;
      for (int y = x + 1; y < n; ++y)
        if (bit(st, y)) two[static_cast<std::size_t>(x) * w + static_cast<std::size_t>(y)] += pi;
    }
  }
  ExactObservables obs;
  obs.profile.values.assign(w, 0.0);
  obs.profile.values.front() = p.alpha;
  obs.profile.values.back() = p.beta;
  for (int x = 1; x < n; ++x) obs.profile.values[static_cast<std::size_t>(x)] = one[static_cast<std::size_t>(x)];
  obs.correlation = CorrelationField(n, 0.0);
  for (int x = 1; x < n; ++x)
    for (int y = x + 1; y < n; ++y)
      obs.correlation.at(x, y) =
          two[static_cast<std::size_t>(x) * w + static_cast<std::size_t>(y)] - one[static_cast<std::size_t>(x)] * one[static_cast<std::size_t>(y)];
  return obs;
}

double expectation(const MasterState& s, const std::function<double(const Configuration&)>& f) {
  double e = 0;
  for (Eigen::Index i = 0; i < s.probs.size(); ++i)
    e += s.probs[i] * f(Configuration::from_index(static_cast<std::uint64_t>(i), s.n));
  return e;
}

double field_second_moment(const MasterState& s, const std::function<double(double)>& f) {
  const int n = s.n;
  std::vector<double> rho(static_cast<std::size_t>(n), 0.0), fx(static_cast<std::size_t>(n), 0.0);
  for (int x = 1; x < n; ++x) fx[static_cast<std::size_t>(x)] = f(static_cast<double>(x) / n);
  for (Eigen::Index i = 0; i < s.probs.size(); ++i)
    for (int x = 1; x < n; ++x)
      if (bit(static_cast<std::uint64_t>(i), x)) rho[static_cast<std::size_t>(x)] += s.probs[i];
  double m2 = 0;
  for (Eigen::Index i = 0; i < s.probs.size(); ++i) {
    double y = 0;
    for (int x = 1; x < n; ++x)
      y += fx[static_cast<std::size_t>(x)] * (bit(static_cast<std::uint64_t>(i), x) - rho[static_cast<std::size_t>(x)]);
    m2 += s.probs[i] * y * y;
  }
  return m2 / n;
}

double field_second_moment(const ExactObservables& obs, const std::function<double(double)>& f) {
  const int n = obs.profile.n();
  double diag = 0, off = 0;
  for (int x = 1; x < n; ++x) {
    const double fx = f(static_cast<double>(x) / n);
    diag += fx * fx * chi(obs.profile[x]);
    for (int y = x + 1; y < n; ++y) off += fx * f(static_cast<double>(y) / n) * obs.correlation(x, y);
  }
  return diag / n + 2.0 * off / n;
}

double duhamel_check(const SystemParams& p, double s, double r, int x, const MasterState& initial) {
  guard_size(p.n, 10);
  if (s < 0 || r < s) throw std::invalid_argument("duhamel_check: need 0 <= s <= r");
  if (x < 1 || x >= p.n) throw std::invalid_argument("duhamel_check: x must lie in 1..n-1");
  const int n = p.n;
  const SparseRowMatrix q = build_full_generator(p);
  MasterState at_s{n, evolve_measure(initial.probs, q, s)};
  const ExactObservables obs = exact_observables(at_s, p);

  Eigen::VectorXd w = at_s.probs;
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] *= bit(static_cast<std::uint64_t>(i), x) - obs.profile[x];
  w = evolve_measure(w, q, r - s);

  const double lag = r - s;
  const Eigen::MatrixXd kernel = absorbed_kernel(p, std::span<const double>(&lag, 1)).front();
  double worst = 0;
  for (int y = 1; y < n; ++y) {
    double lhs = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (bit(static_cast<std::uint64_t>(i), y)) lhs += w[i];
    double rhs = kernel(y - 1, x - 1) * chi(obs.profile[x]);
    for (int z = 1; z < n; ++z)
      if (z != x) rhs += kernel(y - 1, z - 1) * obs.correlation.sym(x, z);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

PartitionCheck partition_function_check(const SystemParams& p) {
  p.validate();
  guard_size(p.n, 10);
  if (p.alpha == p.beta) throw std::invalid_argument("partition_function_check: needs alpha != beta");
  const double c = 2.0 * p.n_pow_theta();
  const int big_n = p.n - 1;
  PartitionCheck out;
  out.gamma_ratio = std::exp(std::lgamma(c + big_n) - std::lgamma(c));
  out.chain_product = 1.0;
  for (int k = 0; k < big_n; ++k) out.chain_product *= c + k;
  out.relative_error = std::abs(out.gamma_ratio - out.chain_product) / out.chain_product;

  const ExactObservables obs = exact_observables(stationary_distribution(p), p);
  const ProfileVector rho = stationary_profile(p);
  const CorrelationField phi = stationary_correlation(p);
  double dev = 0;
  for (int x = 1; x < p.n; ++x) {
    dev = std::max(dev, std::abs(obs.profile[x] - rho[x]));
    for (int y = x + 1; y < p.n; ++y) dev = std::max(dev, std::abs(obs.correlation(x, y) - phi(x, y)));
  }
  out.stationary_consistency = dev;
  return out;
}

}  // namespace sseplab
