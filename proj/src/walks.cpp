#include "sseplab/walks.hpp"

#include "sseplab/numerics.hpp"
#include "sseplab/ode.hpp"
#include "sseplab/parallel.hpp"
#include "sseplab/sim.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sseplab {

OccupationSolution solve_occupation(const DiscreteOperator& op, std::span<const int> target) {
  const auto& tr = op.transient();
  const auto m = static_cast<Eigen::Index>(tr.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int s : target) {
    const int i = op.transient_index(s);
    if (i < 0) throw std::invalid_argument("occupation target must lie in the transient region");
    rhs[i] = 1.0;
  }
  Eigen::SparseMatrix<double> a = -op.transient_generator();
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("occupation solve: singular system (malformed operator)");
  const Eigen::VectorXd t = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("occupation solve failed");

  OccupationSolution sol;
  sol.times = Eigen::VectorXd::Zero(op.state_count());
  for (Eigen::Index i = 0; i < m; ++i) sol.times[tr[static_cast<std::size_t>(i)]] = t[i];
  sol.residual = (a * t - rhs).cwiseAbs().maxCoeff();
  return sol;
}

double occupation_time(const OccupationProblem& problem) {
  if (problem.op.absorbing(problem.start)) return 0.0;
  return solve_occupation(problem.op, problem.target).times[problem.start];
}

OccupationProblem diagonal_occupation(const SystemParams& p, int x, int y) {
  OccupationProblem prob{DiscreteOperator::absorbed_triangle(p), {}, 0};
  for (int z = 1; z + 1 < p.n; ++z) prob.target.push_back(prob.op.state_of(z, z + 1));
  prob.start = prob.op.state_of(x, y);
  if (prob.start < 0) throw std::invalid_argument("diagonal_occupation: start must satisfy 0 <= x < y <= n");
  return prob;
}

MeanEstimate simulate_occupation(const OccupationProblem& problem, std::size_t walks, RandomSource source) {
  if (walks < 1) throw std::invalid_argument("simulate_occupation: walks must be >= 1");
  const auto& op = problem.op;
  std::vector<char> in_target(static_cast<std::size_t>(op.state_count()), 0);
  for (int s : problem.target) in_target[static_cast<std::size_t>(s)] = 1;
  auto blocks = run_blocks<MomentAccumulator>(walks, 256, 1, [&](std::size_t b, std::size_t e) {
    MomentAccumulator acc;
    std::vector<double> rates;
    for (std::size_t w = b; w < e; ++w) {
      RandomStream rng(source.with_stream(w));
      int s = problem.start;
      double occ = 0;
      while (!op.absorbing(s)) {
        const auto out = op.out(s);
        rates.clear();
        double total = 0;
        for (const auto& r : out) {
          rates.push_back(r.rate);
          total += r.rate;
        }
        const double dt = rng.exponential(total);
        if (in_target[static_cast<std::size_t>(s)]) occ += dt;
        s = out[pick_event(rates, total, rng)].to;
      }
      acc.add(occ);
    }
    return acc;
  });
  MomentAccumulator total;
  for (const auto& b : blocks) total.merge(b);
  return total.estimate();
}

namespace {

// Kernel plus its running integrals: K' = M K, I1' = K, I2' = I1, so that
// I2(t) = int_0^t (t - u) K_u du.
struct KernelSnapshots {
  std::vector<Eigen::MatrixXd> kernel, twice_integrated;
};

KernelSnapshots kernel_with_integrals(const SystemParams& p, std::span<const double> times) {
  const int m = p.n - 1;
  const auto mm = static_cast<Eigen::Index>(m) * m;
  const SparseRowMatrix q = DiscreteOperator::absorbed_line(p).transient_generator(p.n_sq());
  OdeOptions opts;
  opts.max_step = step_cap_1d(p.n);
  DormandPrince dp(
      [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        Eigen::Map<const Eigen::MatrixXd> k(y.data(), m, m);
        Eigen::Map<Eigen::MatrixXd> dk(dy.data(), m, m);
        dk.noalias() = q * k;
        dy.segment(mm, mm) = y.segment(0, mm);
        dy.segment(2 * mm, mm) = y.segment(mm, mm);
      },
      opts);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(3 * mm);
  for (int i = 0; i < m; ++i) y[static_cast<Eigen::Index>(i) * m + i] = 1.0;
  KernelSnapshots snap;
  double t = 0;
  for (double target : times) {
    if (target < t) throw std::invalid_argument("coupling_bound_check: times must be nondecreasing");
    dp.integrate(y, t, target);
    t = target;
    snap.kernel.emplace_back(Eigen::Map<const Eigen::MatrixXd>(y.data(), m, m));
    snap.twice_integrated.emplace_back(Eigen::Map<const Eigen::MatrixXd>(y.data() + 2 * mm, m, m));
  }
  return snap;
}

// min over (y, z) of RHS - LHS of the three-term inequality; indices 0-based
double general_margin(const Eigen::MatrixXd& pt, const Eigen::MatrixXd& p0, double nt, int* wy, int* wz) {
  const Eigen::Index m = pt.rows();
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index z = 0; z < m; ++z) {
    const double ends = p0(0, z) + p0(m - 1, z);
    for (Eigen::Index y = 0; y < m; ++y) {
      const double margin = nt * ends + (p0(y, z) - ends) - pt(y, z);
      if (margin < worst) {
        worst = margin;
        if (wy) *wy = static_cast<int>(y) + 1;
        if (wz) *wz = static_cast<int>(z) + 1;
      }
    }
  }
  return worst;
}

double diagonal_margin(const Eigen::MatrixXd& pt, const Eigen::MatrixXd& p0, double nt) {
  const Eigen::Index m = pt.rows();
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index x : {Eigen::Index{0}, m - 1})
    worst = std::min(worst, nt * (p0(0, x) + p0(m - 1, x)) - pt(x, x));
  return worst;
}

}  // namespace

CouplingReport coupling_bound_check(const SystemParams& p, std::span<const double> times) {
  p.validate();
  if (times.empty()) throw std::invalid_argument("coupling_bound_check: empty time grid");
  SystemParams p0 = p;
  p0.theta = 0.0;
  const KernelSnapshots kt = kernel_with_integrals(p, times);
  const KernelSnapshots k0 = kernel_with_integrals(p0, times);
  const double nt = p.n_pow_theta();
  CouplingReport rep;
  rep.min_margin_diagonal = rep.min_margin_general = rep.min_margin_integrated =
      std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    int wy = 0, wz = 0;
    const double g = general_margin(kt.kernel[i], k0.kernel[i], nt, &wy, &wz);
    const double d = diagonal_margin(kt.kernel[i], k0.kernel[i], nt);
    if (g < rep.min_margin_general) {
      rep.min_margin_general = g;
      rep.worst_y = wy;
      rep.worst_z = wz;
      rep.worst_t = times[i];
    }
    rep.min_margin_diagonal = std::min(rep.min_margin_diagonal, d);
    if (rep.first_violation_t < 0 && std::min(g, d) < 0) rep.first_violation_t = times[i];
    rep.min_margin_integrated =
        std::min(rep.min_margin_integrated, general_margin(kt.twice_integrated[i], k0.twice_integrated[i], nt, nullptr, nullptr));
  }
  return rep;
}

namespace {

ReflectedReport reflected_bound(const DiscreteOperator& op, const std::vector<int>& target, std::span<const double> times,
                                double cap) {
  const int n = op.lattice_size();
  const SparseRowMatrix q = op.transient_generator(static_cast<double>(n) * n);
  const Eigen::Index m = q.rows();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * m);
  for (int s : target) y[op.transient_index(s)] = 1.0;
  OdeOptions opts;
  opts.max_step = cap;
  // u(s, x) = P_x(X_s in target) solves u' = n^2 R u; the integral rides along
  DormandPrince dp(
      [&](double, const Eigen::VectorXd& v, Eigen::VectorXd& dv) {
        dv.head(m).noalias() = q * v.head(m);
        dv.tail(m) = v.head(m);
      },
      opts);
  ReflectedReport rep;
  rep.n = n;
  double t = 0;
  for (double target_t : times) {
    if (target_t < t) throw std::invalid_argument("reflected bound: times must be nondecreasing");
    dp.integrate(y, t, target_t);
    t = target_t;
    const double mx = y.tail(m).maxCoeff();
    rep.times.push_back(target_t);
    rep.max_integral.push_back(mx);
    rep.scaled_sup = std::max(rep.scaled_sup, n * mx);
  }
  return rep;
}

}  // namespace

ReflectedReport reflected_occupation_bound_1d(int n, std::span<const double> times) {
  const auto op = DiscreteOperator::reflected_line(n);
  return reflected_bound(op, {op.state_of(1), op.state_of(n - 1)}, times, step_cap_1d(n));
}

ReflectedReport reflected_occupation_bound_2d(int n, std::span<const double> times) {
  const auto op = DiscreteOperator::reflected_triangle(n);
  std::vector<int> diag;
  for (int x = 1; x + 1 < n; ++x) diag.push_back(op.state_of(x, x + 1));
  return reflected_bound(op, diag, times, step_cap_2d(n));
}

double holder_delta(double theta) {
  if (theta < 0) throw std::invalid_argument("holder_delta: theta must be >= 0");
  return theta < 3.0 ? std::abs(1.0 - theta) / 2.0 : 1.0;
}

double holder_prefactor(double theta, int n) {
  if (theta < 0) throw std::invalid_argument("holder_prefactor: theta must be >= 0");
  if (theta == 1.0) throw std::invalid_argument("holder_prefactor: C_n^theta is not defined at theta = 1");
  const double nn = static_cast<double>(n);
  const double c = theta < 1.0 ? std::sqrt(nn) : std::pow(nn, 1.5 - theta);
  return c * c * std::pow(nn, theta);
}

double holder_functional(double theta, int n, double tau) {
  return holder_prefactor(theta, n) * double_time_integral(1, tau, n);
}

HolderReport holder_exponent_check(double theta, std::span<const int> ns, std::span<const double> taus) {
  if (ns.empty() || taus.size() < 2) throw std::invalid_argument("holder_exponent_check: need lattice sizes and >= 2 lags");
  HolderReport rep;
  rep.theta = theta;
  rep.delta = holder_delta(theta);
  for (double tau : taus) {
    double env = 0;
    for (int n : ns) env = std::max(env, holder_functional(theta, n, tau));
    rep.taus.push_back(tau);
    rep.envelope.push_back(env);
  }
  rep.exponent = fit_loglog(rep.taus, rep.envelope).slope;
  return rep;
}

}  // namespace sseplab
