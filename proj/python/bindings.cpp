#include "sseplab/continuum.hpp"
#include "sseplab/harness.hpp"
#include "sseplab/numerics.hpp"
#include "sseplab/oracle.hpp"
#include "sseplab/sim.hpp"
#include "sseplab/walks.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace sseplab;

namespace {

SystemParams params(int n, double theta, double alpha, double beta) {
  SystemParams p{n, theta, alpha, beta};
  p.validate();
  return p;
}

Eigen::MatrixXd dense(const CorrelationField& phi) {
  const int n = phi.n();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int x = 0; x <= n; ++x)
    for (int y = x + 1; y <= n; ++y) m(x, y) = m(y, x) = phi(x, y);
  return m;
}

CorrelationField sparse_field(const Eigen::MatrixXd& m, double time) {
  const int n = static_cast<int>(m.rows()) - 1;
  if (m.cols() != m.rows() || n < 3) throw std::invalid_argument("correlation matrix must be square, size n+1 >= 4");
  CorrelationField phi(n, time);
  for (int x = 1; x < n; ++x)
    for (int y = x + 1; y < n; ++y) phi.at(x, y) = m(x, y);
  return phi;
}

ProfileVector profile_of(const std::vector<double>& v, double time = 0.0) { return {time, v}; }

InitialLaw make_law(const SystemParams& p, const py::object& initial, std::optional<double> burn_in) {
  if (py::isinstance<py::str>(initial)) {
    const auto s = initial.cast<std::string>();
    if (s == "stationary") return InitialLaw::stationary(p, burn_in);
    throw std::invalid_argument("initial must be 'stationary', a 0/1 configuration or a list of marginals");
  }
  const auto v = initial.cast<std::vector<double>>();
  bool binary = true;
  for (double m : v) binary &= m == 0.0 || m == 1.0;
  if (binary) {
    std::vector<std::uint8_t> occ(v.begin(), v.end());
    return InitialLaw::deterministic(Configuration(std::move(occ)));
  }
  return InitialLaw::product(v);
}

BasisPtr basis_for(double theta, double mu, int modes) { return ContinuumBasis::build(BoundaryRegime::for_theta(theta, mu), modes); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Slow-boundary symmetric exclusion: exact solvers, simulation and continuum predictors";
  m.attr("__version__") = SSEPLAB_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("stationary_profile",
        [](int n, double theta, double alpha, double beta) { return stationary_profile(params(n, theta, alpha, beta)).values; },
        py::arg("n"), py::arg("theta"), py::arg("alpha"), py::arg("beta"),
        "Stationary density on sites 0..n, reservoir values at the ends.");
  m.def("stationary_correlation",
        [](int n, double theta, double alpha, double beta) { return dense(stationary_correlation(params(n, theta, alpha, beta))); },
        py::arg("n"), py::arg("theta"), py::arg("alpha"), py::arg("beta"),
        "Stationary two-point function as a symmetric (n+1)x(n+1) matrix, zero diagonal and boundary.");
  m.def("hydro_stationary_profile", &hydro_stationary_profile, py::arg("u"), py::arg("theta"), py::arg("alpha"),
        py::arg("beta"));

  m.def(
      "evolve_profile",
      [](const std::vector<double>& rho0, double theta, double alpha, double beta, std::vector<double> times) {
        const auto p = params(static_cast<int>(rho0.size()) - 1, theta, alpha, beta);
        std::vector<std::vector<double>> out;
        for (const auto& r : evolve_profile(profile_of(rho0), p, times)) out.push_back(r.values);
        return out;
      },
      py::arg("rho0"), py::arg("theta"), py::arg("alpha"), py::arg("beta"), py::arg("times"),
      "Discrete hydrodynamic equation from rho0 (sites 0..n); one profile per requested time.");
  m.def(
      "evolve_correlation",
      [](const std::vector<double>& rho0, const Eigen::MatrixXd& phi0, double theta, double alpha, double beta,
         std::vector<double> times) {
        const auto p = params(static_cast<int>(rho0.size()) - 1, theta, alpha, beta);
        ProfilePath path(p, profile_of(rho0));
        std::vector<Eigen::MatrixXd> out;
        for (const auto& phi : evolve_correlation(sparse_field(phi0, 0.0), path, p, times)) out.push_back(dense(phi));
        return out;
      },
      py::arg("rho0"), py::arg("phi0"), py::arg("theta"), py::arg("alpha"), py::arg("beta"), py::arg("times"),
      "Two-point function started from phi0 with the density started from rho0. phi0 is not checked for admissibility.");
  m.def("heat_kernel_dirichlet", &heat_kernel_dirichlet, py::arg("x"), py::arg("y"), py::arg("t"), py::arg("n"));
  m.def("psi", &psi, py::arg("u"));
  m.def("double_time_integral", &double_time_integral, py::arg("x"), py::arg("t"), py::arg("n"));
  m.def("cosine_sum_check", &cosine_sum_check, py::arg("n"));

  m.def(
      "oracle_stationary",
      [](int n, double theta, double alpha, double beta) {
        const auto p = params(n, theta, alpha, beta);
        const auto o = exact_observables(stationary_distribution(p), p);
        return py::make_tuple(o.profile.values, dense(o.correlation));
      },
      py::arg("n"), py::arg("theta"), py::arg("alpha"), py::arg("beta"),
      "Profile and two-point function of the exact stationary law (n <= 14).");
  m.def(
      "oracle_evolve",
      [](const std::vector<int>& config, double theta, double alpha, double beta, double t) {
        const auto p = params(static_cast<int>(config.size()) + 1, theta, alpha, beta);
        std::vector<std::uint8_t> occ(config.begin(), config.end());
        const auto o = exact_observables(evolve_distribution(MasterState::point(Configuration(std::move(occ))), p, t), p);
        return py::make_tuple(o.profile.values, dense(o.correlation));
      },
      py::arg("config"), py::arg("theta"), py::arg("alpha"), py::arg("beta"), py::arg("t"),
      "Exact profile and two-point function at time t from a configuration on sites 1..n-1.");
  m.def(
      "duhamel_check",
      [](const std::vector<int>& config, double theta, double alpha, double beta, double s, double r, int x) {
        const auto p = params(static_cast<int>(config.size()) + 1, theta, alpha, beta);
        std::vector<std::uint8_t> occ(config.begin(), config.end());
        return duhamel_check(p, s, r, x, MasterState::point(Configuration(std::move(occ))));
      },
      py::arg("config"), py::arg("theta"), py::arg("alpha"), py::arg("beta"), py::arg("s"), py::arg("r"), py::arg("x"));

  m.def(
      "estimate_two_point",
      [](int n, double theta, double alpha, double beta, double t, std::size_t replicas, std::uint64_t seed,
         const py::object& initial, std::optional<double> burn_in, unsigned jobs) {
        const auto p = params(n, theta, alpha, beta);
        const auto law = make_law(p, initial, burn_in);
        CorrelationEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_two_point(p, law, t, {replicas, {seed, 0}, jobs});
        }
        py::dict d;
        d["profile"] = e.profile.mean.values;
        d["profile_stderr"] = e.profile.std_error;
        d["phi"] = dense(e.value);
        d["phi_stderr"] = dense(e.std_error);
        d["replicas"] = e.replicas;
        return d;
      },
      py::arg("n"), py::arg("theta"), py::arg("alpha"), py::arg("beta"), py::arg("t"), py::arg("replicas"),
      py::arg("seed") = 1, py::arg("initial") = "stationary", py::arg("burn_in") = py::none(), py::arg("jobs") = 0,
      "Monte Carlo profile and two-point function with standard errors.\n"
      "initial: 'stationary', a 0/1 list (deterministic start) or a list of Bernoulli marginals.");

  m.def(
      "occupation_time",
      [](int n, double theta, int x, int y) { return occupation_time(diagonal_occupation(params(n, theta, 0.5, 0.5), x, y)); },
      py::arg("n"), py::arg("theta"), py::arg("x"), py::arg("y"),
      "Expected time the absorbed planar walk started at (x, y) spends on the diagonal y = x + 1.");
  m.def(
      "coupling_margins",
      [](int n, double theta, std::vector<double> times) {
        const auto r = coupling_bound_check(params(n, theta, 0.5, 0.5), times);
        py::dict d;
        d["general"] = r.min_margin_general;
        d["diagonal"] = r.min_margin_diagonal;
        d["integrated"] = r.min_margin_integrated;
        d["first_violation_t"] = r.first_violation_t;
        return d;
      },
      py::arg("n"), py::arg("theta"), py::arg("times"));
  m.def("holder_delta", &holder_delta, py::arg("theta"));

  m.def(
      "robin_roots",
      [](double mu, int K) {
        const auto s = robin_spectrum(mu, K);
        std::vector<double> sym, anti;
        for (const auto& r : s.symmetric) sym.push_back(r.root);
        for (const auto& r : s.antisymmetric) anti.push_back(r.root);
        return py::make_tuple(sym, anti, s.interlaced);
      },
      py::arg("mu"), py::arg("K"), "Roots of cot(t) = 2t/mu and tan(w) = -2w/mu, and the interlacing flag.");
  m.def(
      "robin_eigenvalues",
      [](double mu, int K) {
        std::vector<double> out;
        for (const auto& r : robin_eigenvalues(mu, K)) out.push_back(r.eigenvalue);
        return out;
      },
      py::arg("mu"), py::arg("K"));
  m.def(
      "stationary_covariance",
      [](double theta, double alpha, double beta, const std::vector<double>& f, const std::vector<double>& g, int modes) {
        const auto b = basis_for(theta, 1.0, modes);
        auto coeffs = [&](const std::vector<double>& c) {
          if (static_cast<int>(c.size()) > b->size()) throw std::invalid_argument("more coefficients than basis modes");
          Eigen::VectorXd v = Eigen::VectorXd::Zero(b->size());
          for (std::size_t i = 0; i < c.size(); ++i) v[static_cast<Eigen::Index>(i)] = c[i];
          return TestFunction(b, v);
        };
        return stationary_covariance(theta, alpha, beta, coeffs(f), coeffs(g));
      },
      py::arg("theta"), py::arg("alpha"), py::arg("beta"), py::arg("f"), py::arg("g"), py::arg("modes") = 64,
      "Long-time covariance of the stationary field; f and g are coefficient lists in the regime's basis.");
  m.def(
      "ou_equilibrium_variance",
      [](double theta, double rho, int mode, double t) {
        const auto b = basis_for(theta, 1.0, 64);
        const auto f = TestFunction::mode(b, mode);
        return ou_covariance(f, f, t, t, HydroProfile::stationary(b, rho, rho), equilibrium_form(rho)).value;
      },
      py::arg("theta"), py::arg("rho"), py::arg("mode"), py::arg("t"));

  m.def(
      "run",
      [](const std::string& mode, const std::string& config, unsigned jobs, std::optional<std::uint64_t> seed,
         std::optional<std::string> out) {
        RunRequest r;
        r.mode = parse_mode(mode);
        r.config = config;
        r.jobs = jobs;
        r.seed = seed;
        if (out) r.out = *out;
        py::gil_scoped_release release;
        return run(r);
      },
      py::arg("mode"), py::arg("config"), py::arg("jobs") = 0, py::arg("seed") = py::none(), py::arg("out") = py::none(),
      "Runs an experiment like the command-line tool; returns its exit status.");
  m.def("version", &version_string);
}
