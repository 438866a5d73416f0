// Acceptance criteria 1-10. One "C<k> PASS|FAIL <summary>" line per criterion,
// followed by indented detail lines. Exit status is 0 iff every selected
// criterion passes.

#include "sseplab/continuum.hpp"
#include "sseplab/numerics.hpp"
#include "sseplab/oracle.hpp"
#include "sseplab/quadrature.hpp"
#include "sseplab/sim.hpp"
#include "sseplab/stats.hpp"
#include "sseplab/walks.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

using namespace sseplab;

namespace {

using Clock = std::chrono::steady_clock;
using std::numbers::pi;

constexpr double kAlpha = 0.2;
constexpr double kBeta = 0.8;

struct Outcome {
  bool pass = true;
  std::string summary;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<double> grid(double start, double stop, double step) {
  std::vector<double> out;
  const int k = static_cast<int>(std::lround((stop - start) / step));
  for (int i = 0; i <= k; ++i) out.push_back(start + i * step);
  return out;
}

std::FILE* g_log = nullptr;

template <class... A>
void emit(const char* fmt, A... args) {
  std::printf(fmt, args...);
  std::fflush(stdout);
  if (g_log) {
    std::fprintf(g_log, fmt, args...);
    std::fflush(g_log);
  }
}

template <class... A>
void detail(const char* fmt, A... args) {
  emit("%s", "    ");
  emit(fmt, args...);
  emit("%s", "\n");
}

std::string format(const char* fmt, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

Outcome matrix_ansatz() {
  const auto t0 = Clock::now();
  double worst_rho = 0, worst_phi = 0;
  for (int n = 4; n <= 10; ++n)
    for (double theta : {0.0, 0.5, 1.0, 2.0, 3.0}) {
      SystemParams p{n, theta, kAlpha, kBeta};
      const auto o = exact_observables(stationary_distribution(p), p);
      const auto rho = stationary_profile(p);
      const auto phi = stationary_correlation(p);
      for (int x = 1; x < n; ++x) {
        worst_rho = std::max(worst_rho, std::abs(o.profile[x] - rho[x]));
        for (int y = x + 1; y < n; ++y) worst_phi = std::max(worst_phi, std::abs(o.correlation(x, y) - phi(x, y)));
      }
    }
  const double secs = seconds_since(t0);
  detail("max |oracle - closed form|: profile %.3e, correlation %.3e (tol 1e-9); %.2f s (limit 60 s)", worst_rho,
         worst_phi, secs);
  return {worst_rho <= 1e-9 && worst_phi <= 1e-9 && secs < 60,
          format("oracle stationary law vs closed forms, n=4..10, 5 theta values: max error %.2e", std::max(worst_rho, worst_phi))};
}

Outcome monte_carlo_stationary() {
  const int n = 32;
  const double burn_in = 2.0;
  const std::size_t replicas = 20000;
  const std::vector<std::pair<int, int>> pairs{{1, 2}, {1, 31}, {16, 17}};
  const std::vector<int> sites{1, 2, 16, 17, 31};
  bool ok = true;
  double worst_z = 0;
  for (double theta : {0.0, 1.0, 2.0}) {
    SystemParams p{n, theta, kAlpha, kBeta};
    const auto rho = stationary_profile(p);
    const auto phi = stationary_correlation(p);
    // the product start carries no correlation; its exact distance from phi_ss after the burn-in
    const auto relaxed = evolve_correlation(CorrelationField(n, 0.0), [&](double) { return rho; }, p, burn_in);
    double gap = 0;
    for (auto [x, y] : pairs) gap = std::max(gap, std::abs(relaxed(x, y) - phi(x, y)));
    const auto t0 = Clock::now();
    const auto est = estimate_two_point(p, InitialLaw::stationary(p, burn_in), 0.0,
                                        {replicas, {0xacce97ull, static_cast<std::uint64_t>(theta * 10)}, 0});
    double all_sites_z = 0;
    for (int x = 1; x < n; ++x)
      all_sites_z = std::max(all_sites_z, std::abs(est.profile.mean[x] - rho[x]) / est.profile.std_error[x]);
    for (int x : sites) {
      const double z = std::abs(est.profile.mean[x] - rho[x]) / est.profile.std_error[x];
      worst_z = std::max(worst_z, z);
      ok &= z <= 3.0;
    }
    for (auto [x, y] : pairs) {
      const double z = std::abs(est.value(x, y) - phi(x, y)) / est.std_error(x, y);
      worst_z = std::max(worst_z, z);
      ok &= z <= 3.0;
      detail("theta=%g phi(%d,%d): closed form %+.6f, estimate %+.6f +- %.6f (z=%.2f)", theta, x, y, phi(x, y),
             est.value(x, y), est.std_error(x, y), z);
    }
    detail("theta=%g: %zu replicas, burn-in %.1f, exact burn-in gap %.2e, max profile z over all sites %.2f, %.1f s",
           theta, replicas, burn_in, gap, all_sites_z, seconds_since(t0));
  }
  return {ok, format("n=32 stationary ensemble vs closed forms at the listed sites and pairs: max z %.2f (limit 3)", worst_z)};
}

Outcome correlation_scaling() {
  const auto t0 = Clock::now();
  const std::vector<int> ns{8, 16, 32, 64};
  const auto times = grid(0.1, 2.0, 0.1);
  bool ok = true;
  std::string summary = "slopes";
  for (double theta : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    std::vector<double> xs, ys;
    for (int n : ns) {
      SystemParams p{n, theta, kAlpha, kBeta};
      // local Gibbs start on the linear interpolation of the reservoirs, phi_0 = 0
      const auto rho0 = sample_profile(p, [](double u) { return kAlpha + (kBeta - kAlpha) * u; });
      ProfilePath path(p, rho0);
      const auto phis = evolve_correlation(CorrelationField(n, 0.0), path, p, times);
      double sup = 0;
      for (const auto& phi : phis) sup = std::max(sup, phi.max_abs_row(1));
      xs.push_back(n);
      ys.push_back(sup);
    }
    const double slope = fit_loglog(xs, ys).slope;
    const double want = theta <= 1.0 ? theta - 2.0 : -1.0;
    const bool pass = std::abs(slope - want) <= 0.3;
    ok &= pass;
    detail("theta=%g: sup_t max_y |phi_t(1,y)| = %.3e %.3e %.3e %.3e, slope %.3f (predicted %.1f +- 0.3)", theta, ys[0],
           ys[1], ys[2], ys[3], slope, want);
    summary += format(" %.3f", slope);
  }
  const double secs = seconds_since(t0);
  detail("runtime %.1f s (limit 600 s)", secs);
  return {ok && secs < 600, "correlation decay over n=8..64, " + summary};
}

Outcome occupation() {
  double worst_exact = 0, worst_res = 0;
  for (int n = 3; n <= 32; ++n) {
    const auto op = DiscreteOperator::absorbed_triangle({n, 0.0, kAlpha, kBeta});
    std::vector<int> target;
    for (int x = 1; x + 1 < n; ++x) target.push_back(op.state_of(x, x + 1));
    const auto sol = solve_occupation(op, target);
    worst_res = std::max(worst_res, sol.residual);
    for (int x = 1; x < n; ++x)
      for (int y = x + 1; y < n; ++y)
        worst_exact = std::max(worst_exact, std::abs(sol.times[op.state_of(x, y)] - double(x) * (n - y) / (n - 1)));
  }
  double min_margin = std::numeric_limits<double>::infinity();
  for (double theta : {0.5, 1.0, 2.0})
    for (int n : {4, 8, 16, 32}) {
      const auto op = DiscreteOperator::absorbed_triangle({n, theta, kAlpha, kBeta});
      std::vector<int> target;
      for (int x = 1; x + 1 < n; ++x) target.push_back(op.state_of(x, x + 1));
      const auto sol = solve_occupation(op, target);
      worst_res = std::max(worst_res, sol.residual);
      for (int x = 1; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
          min_margin = std::min(min_margin, double(x) * (n - y) / (n - 1) + std::pow(n, theta) - sol.times[op.state_of(x, y)]);
    }
  detail("theta=0, n=3..32: max |T - x(n-y)/(n-1)| = %.2e (tol 1e-9); solver residual %.2e", worst_exact, worst_res);
  detail("theta in {0.5,1,2}, n in {4,8,16,32}: min bound margin %.4f (need >= -1e-9)", min_margin);
  return {worst_exact <= 1e-9 && min_margin >= -1e-9 && worst_res <= 1e-10,
          format("diagonal occupation: exact error %.2e, bound margin %.3f", worst_exact, min_margin)};
}

Outcome coupling() {
  const auto times = grid(0.01, 2.0, 0.01);
  double worst = std::numeric_limits<double>::infinity();
  for (int n : {6, 10})
    for (double theta : {0.5, 1.0, 2.0}) {
      const auto r = coupling_bound_check({n, theta, kAlpha, kBeta}, times);
      worst = std::min({worst, r.min_margin_general, r.min_margin_diagonal});
      detail("n=%d theta=%g: min margin three-term %.4e at (y,z)=(%d,%d) t=%.2f, two-term %.4e, first violation t=%.2f, "
             "time-integrated %.3e",
             n, theta, r.min_margin_general, r.worst_y, r.worst_z, r.worst_t, r.min_margin_diagonal, r.first_violation_t,
             r.min_margin_integrated);
    }
  return {worst >= -1e-9, format("pointwise kernel coupling inequality: min margin %.4e (need >= -1e-9)", worst)};
}

Outcome spectral_identities() {
  double cos_worst = 0;
  for (int n = 2; n <= 128; ++n) cos_worst = std::max(cos_worst, std::abs(cosine_sum_check(n)));

  const std::vector<double> kt{0.001, 0.01, 0.1, 0.5};
  double kernel_worst = 0;
  for (int n = 3; n <= 64; ++n) {
    const auto k = absorbed_kernel({n, 0.0, kAlpha, kBeta}, kt);
    for (std::size_t i = 0; i < kt.size(); ++i)
      for (int x = 1; x < n; ++x)
        for (int y = 1; y < n; ++y)
          kernel_worst = std::max(kernel_worst, std::abs(k[i](x - 1, y - 1) - heat_kernel_dirichlet(x, y, kt[i], n)));
  }

  double dti_ratio = 0;
  for (int n = 8; n <= 64; ++n)
    for (double t : {0.5, 1.0, 2.0}) dti_ratio = std::max(dti_ratio, double_time_integral(1, t, n) / (2 * t / (n * n)));

  std::vector<int> ns;
  for (int n = 8; n <= 4096; n *= 2) ns.push_back(n);
  std::vector<double> taus;
  for (double tau = 1.0 / (4096.0 * 4096.0); tau <= 1.0 / 64.0 * (1 + 1e-12); tau *= 2.0) taus.push_back(tau);
  bool holder_ok = true;
  for (double theta : {0.0, 0.5, 2.0, 2.5}) {
    const auto r = holder_exponent_check(theta, ns, taus);
    holder_ok &= r.exponent >= 1.0 + r.delta - 0.1;
    detail("Holder theta=%g: fitted exponent %.3f, need >= %.2f", theta, r.exponent, 1.0 + r.delta - 0.1);
  }
  detail("cosine sums n=2..128: max %.2e (tol 1e-12)", cos_worst);
  detail("spectral vs ODE kernel n=3..64: max %.2e (tol 1e-8)", kernel_worst);
  detail("double time integral n=8..64: max ratio to 2t/n^2 = %.4f (need <= 1)", dti_ratio);
  const bool ok = cos_worst <= 1e-12 && kernel_worst <= 1e-8 && dti_ratio <= 1.0 && holder_ok;
  return {ok, format("cosine %.1e, kernel %.1e, double-integral ratio %.3f, Holder exponents ok", cos_worst, kernel_worst,
                     dti_ratio)};
}

Outcome robin() {
  const int K = 64;
  bool ok = true;
  double worst_orth = 0, worst_eig = 0, worst_bc = 0;
  for (double mu : {0.5, 1.0, 2.0, 10.0}) {
    const auto s = robin_spectrum(mu, K);
    bool brackets = true;
    for (const auto& m : s.symmetric) brackets &= m.root >= pi * (m.index - 1) && m.root <= pi * (m.index - 0.5);
    for (const auto& m : s.antisymmetric) brackets &= m.root >= pi * (m.index - 0.5) && m.root <= pi * m.index;
    bool interlaced = true;
    for (std::size_t i = 0; i < s.symmetric.size() && i < s.antisymmetric.size(); ++i) {
      interlaced &= s.symmetric[i].root < s.antisymmetric[i].root;
      if (i + 1 < s.symmetric.size()) interlaced &= s.antisymmetric[i].root < s.symmetric[i + 1].root;
    }
    const auto b = ContinuumBasis::build({RegimeKind::Robin, mu}, K);
    // pairwise orthonormality by adaptive quadrature, independent of the tabulated grid
    double orth = 0;
    const int panels = static_cast<int>(std::ceil(2 * b->max_frequency() / pi)) + 1;
    for (int j = 0; j < K; ++j)
      for (int k = 0; k <= j; ++k) {
        const double v = integrate([&](double u) { return b->value(j, u) * b->value(k, u); }, 0.0, 1.0, 1e-11, panels).value;
        orth = std::max(orth, std::abs(v - (j == k ? 1.0 : 0.0)));
      }
    const auto& v = b->validation();
    worst_orth = std::max({worst_orth, orth, v.orthonormality});
    worst_eig = std::max(worst_eig, v.eigen_residual);
    worst_bc = std::max(worst_bc, v.boundary_residual);
    const bool pass = brackets && interlaced && s.interlaced && orth <= 1e-8 && v.ok;
    ok &= pass;
    detail("mu=%g: brackets %s, interlacing %s, orthonormality %.2e (adaptive) / %.2e (grid), eigen residual %.2e (x lambda), "
           "boundary residual %.2e",
           mu, brackets ? "ok" : "VIOLATED", interlaced ? "ok" : "VIOLATED", orth, v.orthonormality, v.eigen_residual,
           v.boundary_residual);
  }
  ok &= worst_orth <= 1e-8 && worst_eig <= 1e-6 && worst_bc <= 1e-8;
  return {ok, format("Robin eigenproblem K=64: orthonormality %.1e, eigen residual %.1e, boundary %.1e", worst_orth, worst_eig,
                     worst_bc)};
}

Outcome fluctuations() {
  const int n = 64;
  const std::size_t replicas = 10000;
  bool ok = true;
  double worst_z = 0;

  // (a) equilibrium
  {
    SystemParams p{n, 2.0, 0.5, 0.5};
    std::vector<TestFn> fs{[](double) { return 1.0; }, [](double u) { return std::sqrt(2.0) * std::cos(pi * u); }};
    const char* names[] = {"1", "sqrt2 cos(pi u)"};
    ProfileVector flat{0.0, std::vector<double>(n + 1, 0.5)};
    Centering center = [&](double) -> std::optional<ProfileVector> { return flat; };
    const auto law = InitialLaw::local_gibbs(p, [](double) { return 0.5; });
    for (double t : {0.1, 0.5}) {
      for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto rep = estimate_field_covariance(p, law, t, t, std::span(&fs[i], 1), std::span(&fs[i], 1), center,
                                                   {replicas, {0xf1c7ull, static_cast<std::uint64_t>(t * 100 + i)}, 0});
        double finite = 0;
        for (int x = 1; x < n; ++x) finite += fs[i](double(x) / n) * fs[i](double(x) / n);
        finite *= 0.25 / n;
        const double z = std::abs(rep.estimate(0, 0) - 0.25) / rep.std_error(0, 0);
        worst_z = std::max(worst_z, z);
        ok &= z <= 3.0;
        detail("(a) t=%.1f f=%s: estimate %.5f +- %.5f vs 0.25 (z=%.2f); finite-n exact %.5f (z=%.2f)", t, names[i],
               rep.estimate(0, 0), rep.std_error(0, 0), z, finite, std::abs(rep.estimate(0, 0) - finite) / rep.std_error(0, 0));
      }
    }
  }

  // (b) non-equilibrium stationary state, Dirichlet regime
  {
    SystemParams p{n, 0.0, kAlpha, kBeta};
    const double burn_in = 1.0;
    TestFn f = [](double u) { return std::sqrt(2.0) * std::sin(pi * u); };
    const auto basis = ContinuumBasis::build({RegimeKind::Dirichlet});
    const auto tf = TestFunction::mode(basis, 0);
    const double predicted = stationary_covariance(0.0, kAlpha, kBeta, tf, tf);
    const auto rho = stationary_profile(p);
    const double finite = field_second_moment(ExactObservables{rho, stationary_correlation(p)}, f);
    const auto relaxed = evolve_correlation(CorrelationField(n, 0.0), [&](double) { return rho; }, p, burn_in);
    const double at_burn_in = field_second_moment(ExactObservables{rho, relaxed}, f);
    Centering center = [&](double) -> std::optional<ProfileVector> { return rho; };
    const auto rep = estimate_field_covariance(p, InitialLaw::stationary(p, burn_in), 0.0, 0.0, std::span(&f, 1),
                                               std::span(&f, 1), center, {replicas, {0xf1c7ull, 99}, 0});
    const double z = std::abs(rep.estimate(0, 0) - predicted) / rep.std_error(0, 0);
    worst_z = std::max(worst_z, z);
    ok &= z <= 3.0;
    detail("(b) theta=0 stationary, f=sqrt2 sin(pi u): estimate %.5f +- %.5f vs two-term value %.5f (z=%.2f)",
           rep.estimate(0, 0), rep.std_error(0, 0), predicted, z);
    detail("(b) finite-n exact stationary variance %.5f (O(1/n) bias %.1e); exact law after burn-in %.1f gives %.5f", finite,
           finite - predicted, burn_in, at_burn_in);
  }
  return {ok, format("fluctuation field variances, n=64, %g replicas: max z %.2f (limit 3)", double(replicas), worst_z)};
}

Outcome reflected() {
  const std::vector<int> ns{8, 16, 32, 64};
  const auto times = grid(0.1, 2.0, 0.1);
  bool ok = true;
  std::string summary = "slopes";
  for (int dim : {1, 2}) {
    std::vector<double> xs, ys, scaled;
    for (int n : ns) {
      const auto r = dim == 1 ? reflected_occupation_bound_1d(n, times) : reflected_occupation_bound_2d(n, times);
      xs.push_back(n);
      ys.push_back(r.scaled_sup / n);
      scaled.push_back(r.scaled_sup);
    }
    const double slope = fit_loglog(xs, ys).slope;
    const double spread = *std::max_element(scaled.begin(), scaled.end()) / *std::min_element(scaled.begin(), scaled.end());
    const bool pass = slope >= -1.3 && slope <= -0.7 && spread <= 1.3;
    ok &= pass;
    detail("%dD: n * sup_t,x integral = %.4f %.4f %.4f %.4f (max/min %.3f, need <= 1.3), slope %.3f (need -1 +- 0.3)", dim,
           scaled[0], scaled[1], scaled[2], scaled[3], spread, slope);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double t = times.back();
      const double env = dim == 1 ? (13.0 * t + 3.0) / 2.0 : (4.0 * t + 6.0) * ns[i] / (2.0 * ns[i] - 6.0);
      ok &= scaled[i] <= env;
      detail("%dD n=%d: %.4f <= envelope %s = %.4f at t=%.1f", dim, ns[i], scaled[i],
             dim == 1 ? "(13t+3)/2" : "(4t+6)n/(2n-6)", env, t);
    }
    summary += format(" %.3f", slope);
  }
  return {ok, "reflected occupation integrals bounded, " + summary};
}

Outcome duhamel() {
  double worst = 0;
  for (double theta : {0.0, 2.0}) {
    SystemParams p{5, theta, kAlpha, kBeta};
    const std::vector<MasterState> inits{MasterState::point(Configuration({1, 0, 0, 1})),
                                         MasterState::product(std::vector<double>{0.9, 0.1, 0.6, 0.3})};
    for (const auto& init : inits)
      for (double s : {0.0, 0.1, 0.2, 0.5})
        for (double dr : {0.0, 0.05, 0.5, 1.0})
          for (int x = 1; x < 5; ++x) worst = std::max(worst, duhamel_check(p, s, s + dr, x, init));
  }
  detail("n=5, theta in {0,2}, two initial laws, s in {0,0.1,0.2,0.5}, r-s in {0,0.05,0.5,1}, x=1..4: max residual %.2e", worst);
  return {worst <= 1e-8, format("space-time correlation identity: max residual %.2e (tol 1e-8)", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string log;
  app.add_option("--only", only, "run only these criteria (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--log", log, "also append the output to this file");
  CLI11_PARSE(app, argc, argv);
  if (!log.empty() && !(g_log = std::fopen(log.c_str(), "a"))) {
    std::fprintf(stderr, "cannot open %s\n", log.c_str());
    return 2;
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"matrix ansatz", matrix_ansatz},       {"monte carlo", monte_carlo_stationary},
      {"correlation scaling", correlation_scaling}, {"occupation", occupation},
      {"coupling", coupling},                 {"spectral", spectral_identities},
      {"robin", robin},                       {"fluctuations", fluctuations},
      {"reflected", reflected},               {"duhamel", duhamel},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), k) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("aborted: ") + e.what()};
    }
    emit("C%d %s [%s] %s (%.1f s)\n", k, o.pass ? "PASS" : "FAIL", criteria[i].first, o.summary.c_str(),
         seconds_since(t0));
    all &= o.pass;
  }
  if (g_log) std::fclose(g_log);
  return all ? 0 : 1;
}
