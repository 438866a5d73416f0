#include "sseplab/harness.hpp"

#include "sseplab/continuum.hpp"
#include "sseplab/numerics.hpp"
#include "sseplab/oracle.hpp"
#include "sseplab/parallel.hpp"
#include "sseplab/sim.hpp"
#include "sseplab/walks.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#ifndef SSEPLAB_VERSION
#define SSEPLAB_VERSION "0.0.0"
#endif
#ifndef SSEPLAB_GIT_REV
#define SSEPLAB_GIT_REV "unknown"
#endif

namespace sseplab {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::vector<std::pair<Mode, std::string>>& mode_table() {
  static const std::vector<std::pair<Mode, std::string>> t = {
      {Mode::Profile, "profile"}, {Mode::Correlations, "correlations"}, {Mode::Stationary, "stationary"},
      {Mode::Fluctuations, "fluctuations"}, {Mode::Bounds, "bounds"}, {Mode::Verify, "verify"},
      {Mode::Spectrum, "spectrum"}};
  return t;
}

const std::set<std::string> kBoundChecks = {"correlation_scaling", "stationary_order", "occupation", "coupling",
                                            "reflected", "holder", "double_time_integral", "gradient"};

const std::set<std::string> kShapes = {"linear", "flat", "bump", "stationary"};

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  return j.get<int>();
}

template <class T, class Fn>
std::vector<T> list(const json& j, const std::string& field, Fn&& item) {
  std::vector<T> out;
  if (!j.is_array()) {
    out.push_back(item(j, field));
    return out;
  }
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(item(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> parse_times(const json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "start" && it.key() != "stop" && it.key() != "step")
        throw ConfigError("times." + it.key(), "unknown key (expected start, stop, step)");
    if (!j.contains("start") || !j.contains("stop") || !j.contains("step"))
      throw ConfigError("times", "range needs start, stop and step");
    const double a = number(j["start"], "times.start"), b = number(j["stop"], "times.stop"),
                 h = number(j["step"], "times.step");
    if (!(h > 0)) throw ConfigError("times.step", "must be > 0");
    if (b < a) throw ConfigError("times.stop", "must be >= start");
    const auto count = static_cast<long>(std::floor((b - a) / h + 1e-9)) + 1;
    if (count > 100000) throw ConfigError("times", "range has too many points");
    std::vector<double> t;
    for (long i = 0; i < count; ++i) t.push_back(a + static_cast<double>(i) * h);
    return t;
  }
  return list<double>(j, "times", number);
}

std::string test_function_error(const std::string& spec, double theta) {
  const BoundaryRegime reg = BoundaryRegime::for_theta(theta);
  if (spec == "const") return reg.kind == RegimeKind::Neumann ? "" : "const is only a test function when theta > 1";
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return "unknown test function '" + spec + "' (expected const, sin:k, cos:k, mode:k)";
  const std::string kind = spec.substr(0, colon);
  int k = 0;
  try {
    std::size_t used = 0;
    k = std::stoi(spec.substr(colon + 1), &used);
    if (used != spec.size() - colon - 1) return "bad index in '" + spec + "'";
  } catch (const std::exception&) {
    return "bad index in '" + spec + "'";
  }
  if (kind == "sin") {
    if (k < 1) return "sin:k needs k >= 1";
    return reg.kind == RegimeKind::Dirichlet ? "" : "sin:k is only a test function when theta < 1";
  }
  if (kind == "cos") {
    if (k < 1) return "cos:k needs k >= 1";
    return reg.kind == RegimeKind::Neumann ? "" : "cos:k is only a test function when theta > 1";
  }
  if (kind == "mode") return k >= 0 ? "" : "mode:k needs k >= 0";
  return "unknown test function '" + spec + "'";
}

}  // namespace

Mode parse_mode(const std::string& name) {
  for (const auto& [m, s] : mode_table())
    if (s == name) return m;
  throw ConfigError("mode", "unknown mode '" + name + "'");
}

std::string mode_name(Mode m) {
  for (const auto& [mm, s] : mode_table())
    if (mm == m) return s;
  return "?";
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string version_string() { return std::string("sseplab ") + SSEPLAB_VERSION + " (" + SSEPLAB_GIT_REV + ")"; }

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<document>", "top level must be an object");
  ExperimentConfig cfg;
  cfg.source_text = text;
  static const std::set<std::string> known = {"schema_version", "mode",   "grid",      "alpha",   "beta",
                                              "times",          "replicas", "seed",    "burn_in", "output",
                                              "tolerances",     "initial", "checks",   "test_functions",
                                              "mu",             "modes"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(it.key(), "unknown field");

  if (!j.contains("schema_version")) throw ConfigError("schema_version", "missing");
  cfg.schema_version = integer(j["schema_version"], "schema_version");
  if (cfg.schema_version != kConfigSchemaVersion)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(cfg.schema_version));

  if (j.contains("mode")) {
    if (!j["mode"].is_string()) throw ConfigError("mode", "expected a string");
    cfg.mode = parse_mode(j["mode"].get<std::string>());
  }

  if (!j.contains("grid") || !j["grid"].is_object()) throw ConfigError("grid", "missing or not an object");
  const json& g = j["grid"];
  for (auto it = g.begin(); it != g.end(); ++it)
    if (it.key() != "n" && it.key() != "theta") throw ConfigError("grid." + it.key(), "unknown field");
  if (!g.contains("n")) throw ConfigError("grid.n", "missing");
  if (!g.contains("theta")) throw ConfigError("grid.theta", "missing");
  cfg.n = list<int>(g["n"], "grid.n", integer);
  cfg.theta = list<double>(g["theta"], "grid.theta", number);
  if (cfg.n.empty()) throw ConfigError("grid.n", "must be nonempty");
  if (cfg.theta.empty()) throw ConfigError("grid.theta", "must be nonempty");
  for (int n : cfg.n)
    if (n < 3) throw ConfigError("grid.n", "every n must be >= 3");
  for (double t : cfg.theta)
    if (!(t >= 0) || !std::isfinite(t)) throw ConfigError("grid.theta", "every theta must be finite and >= 0");

  if (j.contains("alpha")) cfg.alpha = number(j["alpha"], "alpha");
  if (j.contains("beta")) cfg.beta = number(j["beta"], "beta");
  if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw ConfigError("alpha", "must lie in (0, 1)");
  if (!(cfg.beta > 0 && cfg.beta < 1)) throw ConfigError("beta", "must lie in (0, 1)");

  if (j.contains("times")) cfg.times = parse_times(j["times"]);
  for (double t : cfg.times)
    if (!(t >= 0) || !std::isfinite(t)) throw ConfigError("times", "every time must be finite and >= 0");
  if (!std::is_sorted(cfg.times.begin(), cfg.times.end())) throw ConfigError("times", "must be nondecreasing");

  if (j.contains("replicas")) {
    const json& r = j["replicas"];
    if (!r.is_number_integer() || r.get<long long>() < 1) throw ConfigError("replicas", "expected a positive integer (omit it for exact-only runs)");
    cfg.replicas = r.get<std::size_t>();
  }
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (s.is_number_unsigned()) {
      cfg.seed = s.get<std::uint64_t>();
    } else if (s.is_string()) {
      try {
        cfg.seed = parse_seed(s.get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError("seed", e.what());
      }
    } else {
      throw ConfigError("seed", "expected a nonnegative integer or a decimal/0x-hex string");
    }
  }
  if (j.contains("burn_in")) {
    cfg.burn_in = number(j["burn_in"], "burn_in");
    if (!(*cfg.burn_in >= 0)) throw ConfigError("burn_in", "must be >= 0");
  }
  if (j.contains("output")) {
    if (!j["output"].is_string() || j["output"].get<std::string>().empty())
      throw ConfigError("output", "expected a nonempty path string");
    cfg.output = j["output"].get<std::string>();
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) throw ConfigError("tolerances", "expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      const std::string f = "tolerances." + it.key();
      double* slot = it.key() == "abs" ? &cfg.tol.abs
                     : it.key() == "z_score" ? &cfg.tol.z_score
                     : it.key() == "slope" ? &cfg.tol.slope
                                           : nullptr;
      if (!slot) throw ConfigError(f, "unknown field");
      *slot = number(it.value(), f);
      if (!(*slot > 0)) throw ConfigError(f, "must be > 0");
    }
  }
  if (j.contains("initial")) {
    const json& in = j["initial"];
    if (!in.is_object()) throw ConfigError("initial", "expected an object");
    for (auto it = in.begin(); it != in.end(); ++it) {
      if (it.key() == "profile") {
        if (!it.value().is_string() || !kShapes.count(it.value().get<std::string>()))
          throw ConfigError("initial.profile", "expected one of linear, flat, bump, stationary");
        cfg.initial.shape = it.value().get<std::string>();
      } else if (it.key() == "amplitude") {
        cfg.initial.amplitude = number(it.value(), "initial.amplitude");
      } else {
        throw ConfigError("initial." + it.key(), "unknown field");
      }
    }
    const double lo = std::min(cfg.alpha, cfg.beta), hi = std::max(cfg.alpha, cfg.beta);
    if (cfg.initial.shape == "bump" && (lo + cfg.initial.amplitude <= 0 || hi + cfg.initial.amplitude >= 1))
      throw ConfigError("initial.amplitude", "bump leaves (0, 1)");
  }
  if (j.contains("checks")) {
    cfg.checks = list<std::string>(j["checks"], "checks", [](const json& x, const std::string& f) {
      if (!x.is_string() || !kBoundChecks.count(x.get<std::string>())) throw ConfigError(f, "unknown bound check");
      return x.get<std::string>();
    });
  }
  if (j.contains("test_functions")) {
    cfg.test_functions = list<std::string>(j["test_functions"], "test_functions", [](const json& x, const std::string& f) {
      if (!x.is_string()) throw ConfigError(f, "expected a string");
      return x.get<std::string>();
    });
  }
  if (j.contains("mu")) {
    cfg.mu = list<double>(j["mu"], "mu", number);
    for (double m : cfg.mu)
      if (!(m > 0)) throw ConfigError("mu", "every mu must be > 0");
  }
  if (j.contains("modes")) {
    cfg.modes = integer(j["modes"], "modes");
    if (cfg.modes < 1 || cfg.modes > 4096) throw ConfigError("modes", "must lie in [1, 4096]");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_for_mode(const ExperimentConfig& cfg, Mode mode) {
  if (cfg.mode && *cfg.mode != mode)
    throw ConfigError("mode", "config declares '" + mode_name(*cfg.mode) + "' but '" + mode_name(mode) + "' was requested");
  const bool needs_times = mode == Mode::Profile || mode == Mode::Correlations || mode == Mode::Fluctuations;
  if (needs_times && cfg.times.empty()) throw ConfigError("times", "required for mode " + mode_name(mode));
  if (mode == Mode::Fluctuations) {
    if (cfg.replicas < 1) throw ConfigError("replicas", "must be >= 1 for Monte Carlo modes");
    if (cfg.test_functions.empty()) throw ConfigError("test_functions", "required for mode fluctuations");
    for (double th : cfg.theta)
      for (const auto& f : cfg.test_functions) {
        const std::string err = test_function_error(f, th);
        if (!err.empty()) throw ConfigError("test_functions", err);
      }
  }
  if (mode == Mode::Stationary || mode == Mode::Verify)
    for (int n : cfg.n)
      if (mode == Mode::Verify && n > kOracleMaxN)
        throw ConfigError("grid.n", "verify mode enumerates the state space; n must be <= " + std::to_string(kOracleMaxN));
  if (mode == Mode::Spectrum)
    for (int n : cfg.n)
      if (n > 256) throw ConfigError("grid.n", "spectrum mode integrates the kernel ODE; n must be <= 256");
  if (mode == Mode::Bounds) {
    for (const auto& c : cfg.checks) {
      if ((c == "correlation_scaling" || c == "stationary_order" || c == "reflected") && cfg.n.size() < 2)
        throw ConfigError("grid.n", c + " fits a slope and needs at least two lattice sizes");
      if ((c == "coupling" || c == "gradient" || c == "double_time_integral" || c == "correlation_scaling" ||
           c == "reflected") && cfg.times.empty())
        throw ConfigError("times", c + " needs a time grid");
      if (c == "holder")
        for (double th : cfg.theta)
          if (th == 1.0) throw ConfigError("grid.theta", "holder check is undefined at theta = 1");
    }
  }
}

void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("csv row width does not match the schema");
  rows.push_back(std::move(row));
}

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  return std::get<std::string>(c);
}

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void emit_csv(const CsvTable& table, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# generated " << utc_now() << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

bool RunReport::all_pass() const {
  if (incomplete) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckRow& r) { return r.pass; });
}

void RunReport::write(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::size_t passed =
      static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const CheckRow& r) { return r.pass; }));
  out << "sseplab run report\n";
  out << "mode: " << mode_name(mode) << "\n";
  out << "status: " << (incomplete ? "INCOMPLETE" : all_pass() ? "PASS" : "FAIL") << " (" << passed << "/"
      << checks.size() << " checks passed)\n";
  if (incomplete) out << "incomplete: " << failure << "\n";
  out << "\nCHECKS\n";
  char buf[512];
  for (const auto& r : checks) {
    std::snprintf(buf, sizeof buf, "%-4s %-44s predicted=%-14.8g observed=%-14.8g tol=%-10.3g margin=%-12.4g | %s\n",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.predicted, r.observed, r.tolerance, r.margin,
                  r.anchor.c_str());
    out << buf;
  }
  out << "\nPROVENANCE\n";
  for (const auto& [k, v] : provenance) out << k << ": " << v << "\n";
  out << "\nTIMING\n";
  for (const auto& [k, v] : timing) {
    std::snprintf(buf, sizeof buf, "%s: %.3f s\n", k.c_str(), v);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::function<double(double)> initial_profile(const ExperimentConfig& cfg, double theta) {
  const double a = cfg.alpha, b = cfg.beta, amp = cfg.initial.amplitude;
  if (cfg.initial.shape == "flat") return [=](double) { return 0.5 * (a + b); };
  if (cfg.initial.shape == "bump") return [=](double u) { return a + (b - a) * u + amp * std::sin(kPi * u); };
  if (cfg.initial.shape == "stationary") return [=](double u) { return hydro_stationary_profile(u, theta, a, b); };
  return [=](double u) { return a + (b - a) * u; };
}

struct TestSpec {
  std::string name;
  TestFn discrete;
  TestFunction continuum;
};

TestSpec make_test_function(const std::string& spec, const BasisPtr& basis) {
  const double r2 = std::sqrt(2.0);
  if (spec == "const") return {spec, [](double) { return 1.0; }, TestFunction::mode(basis, 0)};
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const int k = std::stoi(spec.substr(colon + 1));
  const int index = kind == "sin" ? k - 1 : k;
  if (index >= basis->size()) throw ConfigError("test_functions", spec + " exceeds the truncation order");
  if (kind == "sin")
    return {spec, [=](double u) { return r2 * std::sin(k * kPi * u); }, TestFunction::mode(basis, k - 1)};
  if (kind == "cos")
    return {spec, [=](double u) { return r2 * std::cos(k * kPi * u); }, TestFunction::mode(basis, k)};
  return {spec, [basis, k](double u) { return basis->value(k, u); }, TestFunction::mode(basis, k)};
}

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, Mode mode, unsigned jobs) : cfg_(cfg), jobs_(jobs) { rep_.mode = mode; }

  RunReport run() {
    const auto start = Clock::now();
    fs::create_directories(cfg_.output);
    try {
      switch (rep_.mode) {
        case Mode::Profile: profile(); break;
        case Mode::Correlations: correlations(); break;
        case Mode::Stationary: stationary(); break;
        case Mode::Fluctuations: fluctuations(); break;
        case Mode::Bounds: bounds(); break;
        case Mode::Verify: verify(); break;
        case Mode::Spectrum: spectrum(); break;
      }
    } catch (const std::exception& e) {
      rep_.incomplete = true;
      rep_.failure = e.what();
    }
    rep_.timing.emplace_back("total", seconds_since(start));
    return std::move(rep_);
  }

 private:
  using Clock = std::chrono::steady_clock;

  static double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }

  SystemParams params(int n, double theta) const {
    SystemParams p{n, theta, cfg_.alpha, cfg_.beta};
    p.validate();
    return p;
  }

  EnsembleOptions ensemble() const {
    EnsembleOptions o;
    o.replicas = cfg_.replicas;
    o.source = RandomSource{cfg_.seed, 0};
    o.jobs = jobs_;
    return o;
  }

  // |observed - predicted| <= tol
  void check_close(const std::string& name, const std::string& anchor, double predicted, double observed, double tol) {
    const double margin = tol - std::abs(observed - predicted);
    rep_.checks.push_back({name, anchor, predicted, observed, tol, margin, margin >= 0});
  }
  // observed <= bound
  void check_upper(const std::string& name, const std::string& anchor, double bound, double observed, double slack) {
    const double margin = bound + slack - observed;
    rep_.checks.push_back({name, anchor, bound, observed, slack, margin, margin >= 0});
  }
  // observed >= bound
  void check_lower(const std::string& name, const std::string& anchor, double bound, double observed, double slack) {
    const double margin = observed - bound + slack;
    rep_.checks.push_back({name, anchor, bound, observed, slack, margin, margin >= 0});
  }

  void write(const CsvTable& t, const std::string& file) {
    emit_csv(t, cfg_.output / file);
    rep_.provenance["output." + file] = (cfg_.output / file).string();
  }

  static std::string tag(int n, double theta) { return "n=" + std::to_string(n) + ",theta=" + fmt(theta); }

  static CsvTable profile_table() { return {{"n", "theta", "alpha", "beta", "t", "x", "rho", "stderr_or_0"}, {}}; }
  static CsvTable correlation_table() { return {{"n", "theta", "t", "x", "y", "phi", "stderr_or_0"}, {}}; }
  static CsvTable bounds_table() { return {{"check_name", "n", "theta", "t_or_range", "value", "envelope", "margin"}, {}}; }

  void add_profile(CsvTable& t, const SystemParams& p, const ProfileVector& rho, const std::vector<double>* se) const {
    for (int x = 0; x <= p.n; ++x)
      t.add({std::int64_t{p.n}, p.theta, p.alpha, p.beta, rho.time, std::int64_t{x}, rho[x],
             se ? (*se)[static_cast<std::size_t>(x)] : 0.0});
  }

  void add_correlation(CsvTable& t, const SystemParams& p, const CorrelationField& phi, const CorrelationField* se) const {
    for (int x = 1; x < p.n; ++x)
      for (int y = x + 1; y < p.n; ++y)
        t.add({std::int64_t{p.n}, p.theta, phi.time(), std::int64_t{x}, std::int64_t{y}, phi(x, y), se ? (*se)(x, y) : 0.0});
  }

  // ---------------------------------------------------------------- profile
  void profile() {
    CsvTable exact = profile_table(), mc = profile_table();
    for (int n : cfg_.n)
      for (double th : cfg_.theta) {
        const auto t0 = Clock::now();
        const SystemParams p = params(n, th);
        const auto rho0fn = initial_profile(cfg_, th);
        const ProfileVector rho0 = sample_profile(p, rho0fn);
        const auto path = evolve_profile(rho0, p, cfg_.times);
        for (const auto& r : path) add_profile(exact, p, r, nullptr);
        double lo = std::min(cfg_.alpha, cfg_.beta), hi = std::max(cfg_.alpha, cfg_.beta);
        for (double v : rho0.values) lo = std::min(lo, v), hi = std::max(hi, v);
        double excess = 0;
        for (const auto& r : path)
          for (double v : r.values) excess = std::max({excess, v - hi, lo - v});
        check_upper("maximum principle " + tag(n, th), "evolved profile stays between initial and reservoir extremes", 0.0,
                    excess, 1e-12);
        if (n <= 12) {
          std::vector<double> marg(rho0.values.begin() + 1, rho0.values.end() - 1);
          const MasterState s0 = MasterState::product(marg);
          double worst = 0;
          for (std::size_t i = 0; i < cfg_.times.size(); ++i) {
            const auto obs = exact_observables(evolve_distribution(s0, p, cfg_.times[i]), p);
            for (int x = 1; x < n; ++x) worst = std::max(worst, std::abs(obs.profile[x] - path[i][x]));
          }
          check_close("profile vs master equation " + tag(n, th), "discrete heat equation closes the one-point function",
                      0.0, worst, 1e-8);
        }
        if (cfg_.replicas > 0) {
          const auto est = estimate_profile(p, InitialLaw::local_gibbs(p, rho0fn), cfg_.times, ensemble());
          double zmax = 0;
          for (std::size_t i = 0; i < est.size(); ++i) {
            add_profile(mc, p, est[i].mean, &est[i].std_error);
            for (int x = 1; x < n; ++x) {
              const double se = est[i].std_error[static_cast<std::size_t>(x)];
              if (se > 0) zmax = std::max(zmax, std::abs(est[i].mean[x] - path[i][x]) / se);
            }
          }
          check_upper("profile Monte Carlo max z " + tag(n, th), "empirical profile of the particle system", cfg_.tol.z_score,
                      zmax, 0.0);
        }
        rep_.timing.emplace_back(tag(n, th), seconds_since(t0));
      }
    write(exact, "profile_exact.csv");
    if (cfg_.replicas > 0) write(mc, "profile_mc.csv");
  }

  // ----------------------------------------------------------- correlations
  void correlations() {
    CsvTable exact = correlation_table(), mc = correlation_table();
    for (int n : cfg_.n)
      for (double th : cfg_.theta) {
        const auto t0 = Clock::now();
        const SystemParams p = params(n, th);
        const auto rho0fn = initial_profile(cfg_, th);
        const ProfileVector rho0 = sample_profile(p, rho0fn);
        const ProfilePath path(p, rho0);
        const auto phis = evolve_correlation(CorrelationField(n, 0.0), path, p, cfg_.times);
        for (const auto& f : phis) add_correlation(exact, p, f, nullptr);
        double bound = 0;
        for (const auto& f : phis) bound = std::max(bound, f.max_abs());
        check_upper("covariance range " + tag(n, th), "two-point function of 0/1 variables", 0.25, bound, 0.0);
        if (n <= 10) {
          std::vector<double> marg(rho0.values.begin() + 1, rho0.values.end() - 1);
          const MasterState s0 = MasterState::product(marg);
          double worst = 0;
          for (std::size_t i = 0; i < cfg_.times.size(); ++i) {
            const auto obs = exact_observables(evolve_distribution(s0, p, cfg_.times[i]), p);
            for (int x = 1; x < n; ++x)
              for (int y = x + 1; y < n; ++y) worst = std::max(worst, std::abs(obs.correlation(x, y) - phis[i](x, y)));
          }
          check_close("correlation vs master equation " + tag(n, th),
                      "two-point equation with gradient-squared source closes exactly", 0.0, worst, 1e-8);
        }
        if (cfg_.replicas > 0) {
          double zmax = 0;
          for (std::size_t i = 0; i < cfg_.times.size(); ++i) {
            const auto est = estimate_two_point(p, InitialLaw::local_gibbs(p, rho0fn), cfg_.times[i], ensemble());
            add_correlation(mc, p, est.value, &est.std_error);
            for (int x = 1; x < n; ++x)
              for (int y = x + 1; y < n; ++y)
                if (est.std_error(x, y) > 0)
                  zmax = std::max(zmax, std::abs(est.value(x, y) - phis[i](x, y)) / est.std_error(x, y));
          }
          check_upper("correlation Monte Carlo max z " + tag(n, th), "two-point correlation function", cfg_.tol.z_score,
                      zmax, 0.0);
        }
        rep_.timing.emplace_back(tag(n, th), seconds_since(t0));
      }
    write(exact, "correlation_exact.csv");
    if (cfg_.replicas > 0) write(mc, "correlation_mc.csv");
  }

  // ------------------------------------------------------------- stationary
  void stationary() {
    CsvTable prof = profile_table(), corr = correlation_table(), mcp = profile_table(), mcc = correlation_table();
    for (int n : cfg_.n)
      for (double th : cfg_.theta) {
        const auto t0 = Clock::now();
        const SystemParams p = params(n, th);
        const ProfileVector rho = stationary_profile(p);
        add_profile(prof, p, rho, nullptr);
        check_upper("profile stationarity residual " + tag(n, th), "stationary profile solves the discrete heat equation",
                    0.0, profile_residual(p, rho), 1e-9);
        double hydro = 0;
        for (int x = 0; x <= n; ++x)
          hydro = std::max(hydro, std::abs(rho[x] - hydro_stationary_profile(static_cast<double>(x) / n, th, p.alpha, p.beta)));
        rep_.provenance["hydro_gap." + tag(n, th)] = fmt(hydro);
        if (n >= 4) {
          const CorrelationField phi = stationary_correlation(p);
          add_correlation(corr, p, phi, nullptr);
          check_upper("correlation stationarity residual " + tag(n, th),
                      "stationary correlation solves the two-point equation", 0.0, correlation_residual(p, phi, rho), 1e-7);
          if (n <= kOracleMaxN) {
            const auto obs = exact_observables(stationary_distribution(p), p);
            double dp = 0, dc = 0;
            for (int x = 1; x < n; ++x) {
              dp = std::max(dp, std::abs(obs.profile[x] - rho[x]));
              for (int y = x + 1; y < n; ++y) dc = std::max(dc, std::abs(obs.correlation(x, y) - phi(x, y)));
            }
            check_close("stationary profile vs oracle " + tag(n, th), "matrix ansatz: linear stationary profile", 0.0, dp,
                        cfg_.tol.abs);
            check_close("stationary correlation vs oracle " + tag(n, th), "matrix ansatz: stationary two-point function",
                        0.0, dc, cfg_.tol.abs);
          }
          if (cfg_.replicas > 0) monte_carlo_stationary(p, rho, phi, mcp, mcc);
        }
        rep_.timing.emplace_back(tag(n, th), seconds_since(t0));
      }
    write(prof, "profile_stationary.csv");
    write(corr, "correlation_stationary.csv");
    if (cfg_.replicas > 0) {
      write(mcp, "profile_mc.csv");
      write(mcc, "correlation_mc.csv");
    }
  }

  void monte_carlo_stationary(const SystemParams& p, const ProfileVector& rho, const CorrelationField& phi, CsvTable& mcp,
                              CsvTable& mcc) {
    const InitialLaw law = InitialLaw::stationary(p, cfg_.burn_in);
    const auto est = estimate_two_point(p, law, 0.0, ensemble());
    add_profile(mcp, p, est.profile.mean, &est.profile.std_error);
    add_correlation(mcc, p, est.value, &est.std_error);
    // burn-in starts from the product law on the stationary profile; the
    // remaining correlation gap is known exactly
    const auto relaxed = evolve_correlation(CorrelationField(p.n, 0.0), ProfilePath(p, rho),
                                            p, std::vector<double>{law.burn_in()});
    double gap = 0;
    for (int x = 1; x < p.n; ++x)
      for (int y = x + 1; y < p.n; ++y) gap = std::max(gap, std::abs(relaxed[0](x, y) - phi(x, y)));
    rep_.provenance["burn_in." + tag(p.n, p.theta)] = fmt(law.burn_in());
    rep_.provenance["burn_in_correlation_gap." + tag(p.n, p.theta)] = fmt(gap);
    double zp = 0;
    for (int x = 1; x < p.n; ++x) {
      const double se = est.profile.std_error[static_cast<std::size_t>(x)];
      if (se > 0) zp = std::max(zp, std::abs(est.profile.mean[x] - rho[x]) / se);
    }
    check_upper("stationary profile Monte Carlo max z " + tag(p.n, p.theta), "matrix ansatz: linear stationary profile",
                cfg_.tol.z_score, zp, 0.0);
    const int mid = p.n / 2;
    for (auto [x, y] : {std::pair{1, 2}, std::pair{1, p.n - 1}, std::pair{mid, mid + 1}}) {
      if (x >= y || y >= p.n) continue;
      const double se = est.std_error(x, y);
      check_close("stationary phi(" + std::to_string(x) + "," + std::to_string(y) + ") Monte Carlo " + tag(p.n, p.theta),
                  "matrix ansatz: stationary two-point function", phi(x, y), est.value(x, y), cfg_.tol.z_score * se);
    }
  }

  // ----------------------------------------------------------- fluctuations
  void fluctuations() {
    CsvTable tab{{"n", "theta", "s", "t", "f", "g", "predicted", "finite_n_exact", "estimate", "stderr"}, {}};
    const bool equilibrium = cfg_.alpha == cfg_.beta;
    for (double th : cfg_.theta) {
      const BasisPtr basis = ContinuumBasis::build(BoundaryRegime::for_theta(th), cfg_.modes);
      std::vector<TestSpec> fs;
      for (const auto& s : cfg_.test_functions) fs.push_back(make_test_function(s, basis));
      std::vector<TestFn> disc;
      for (const auto& f : fs) disc.push_back(f.discrete);
      const bool stat = cfg_.initial.shape == "stationary" || equilibrium;
      const auto rho0fn = initial_profile(cfg_, th);
      const HydroProfile hydro = stat ? HydroProfile::stationary(basis, cfg_.alpha, cfg_.beta)
                                      : HydroProfile::evolving(basis, cfg_.alpha, cfg_.beta, rho0fn);
      const CovarianceForm sigma = equilibrium ? equilibrium_form(cfg_.alpha) : local_gibbs_form(rho0fn);
      for (int n : cfg_.n) {
        const auto t0 = Clock::now();
        const SystemParams p = params(n, th);
        InitialLaw law = equilibrium ? InitialLaw::product(std::vector<double>(static_cast<std::size_t>(n - 1), cfg_.alpha))
                         : stat     ? InitialLaw::stationary(p, cfg_.burn_in)
                                    : InitialLaw::local_gibbs(p, rho0fn);
        Centering centering;
        if (stat) {
          const ProfileVector ss = stationary_profile(p);
          centering = [ss](double) { return std::optional<ProfileVector>(ss); };
        } else {
          const auto path = std::make_shared<ProfilePath>(p, sample_profile(p, rho0fn));
          centering = [path](double t) { return std::optional<ProfileVector>((*path)(t)); };
        }
        if (law.kind() == InitialLaw::Kind::Stationary) rep_.provenance["burn_in." + tag(n, th)] = fmt(law.burn_in());
        for (double t : cfg_.times) {
          const auto rep = estimate_field_covariance(p, law, t, t, disc, disc, centering, ensemble());
          for (std::size_t i = 0; i < fs.size(); ++i)
            for (std::size_t j = i; j < fs.size(); ++j) {
              double pred = 0;
              if (stat && !equilibrium)
                pred = stationary_covariance(th, cfg_.alpha, cfg_.beta, fs[i].continuum, fs[j].continuum);
              else
                pred = ou_covariance(fs[i].continuum, fs[j].continuum, t, t, hydro, sigma).value;
              const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
              const double est = rep.estimate(ii, jj), se = rep.std_error(ii, jj);
              const std::string name = "Cov(Y(" + fs[i].name + "),Y(" + fs[j].name + ")) t=" + fmt(t) + " " + tag(n, th);
              if (equilibrium) {
                // product Bernoulli law is invariant: chi(rho)/n sum f g is exact at this n
                double exact = 0;
                for (int x = 1; x < n; ++x) {
                  const double u = static_cast<double>(x) / n;
                  exact += fs[i].discrete(u) * fs[j].discrete(u);
                }
                exact *= chi(cfg_.alpha) / n;
                tab.add({std::int64_t{n}, th, t, t, fs[i].name, fs[j].name, pred, exact, est, se});
                check_close(name + " vs exact", "equilibrium fluctuation field at finite n", exact, est,
                            cfg_.tol.z_score * se);
                rep_.provenance["continuum_gap." + name] = fmt(exact - pred);
              } else {
                tab.add({std::int64_t{n}, th, t, t, fs[i].name, fs[j].name, pred, std::string(""), est, se});
                check_close(name, stat ? "stationary fluctuation covariance" : "Ornstein-Uhlenbeck limit covariance",
                            pred, est, cfg_.tol.z_score * se);
              }
            }
        }
        rep_.timing.emplace_back(tag(n, th), seconds_since(t0));
      }
    }
    write(tab, "fluctuations.csv");
  }

  // ----------------------------------------------------------------- bounds
  void bounds() {
    CsvTable tab = bounds_table();
    const std::vector<std::string> checks = cfg_.checks.empty() ? std::vector<std::string>{"correlation_scaling"} : cfg_.checks;
    for (const auto& c : checks) {
      const auto t0 = Clock::now();
      if (c == "correlation_scaling") correlation_scaling(tab);
      if (c == "stationary_order") stationary_order(tab);
      if (c == "occupation") occupation(tab);
      if (c == "coupling") coupling(tab);
      if (c == "reflected") reflected(tab);
      if (c == "holder") holder(tab);
      if (c == "double_time_integral") double_integral(tab);
      if (c == "gradient") gradient(tab);
      rep_.timing.emplace_back(c, seconds_since(t0));
    }
    write(tab, "bounds.csv");
  }

  std::string time_range() const {
    return cfg_.times.empty() ? "" : fmt(cfg_.times.front()) + ":" + fmt(cfg_.times.back());
  }

  void correlation_scaling(CsvTable& tab) {
    struct Item {
      int n;
      double theta;
    };
    std::vector<Item> items;
    for (double th : cfg_.theta)
      for (int n : cfg_.n) items.push_back({n, th});
    auto sups = run_blocks<double>(items.size(), 1, jobs_, [&](std::size_t b, std::size_t) {
      const SystemParams p = params(items[b].n, items[b].theta);
      const ProfileVector rho0 = sample_profile(p, initial_profile(cfg_, p.theta));
      const auto phis = evolve_correlation(CorrelationField(p.n, 0.0), ProfilePath(p, rho0), p, cfg_.times);
      double s = 0;
      for (const auto& f : phis) s = std::max({s, f.max_abs_row(1), f.max_abs_row(p.n - 1)});
      return s;
    });
    for (double th : cfg_.theta) {
      const double expo = th <= 1.0 ? th - 2.0 : -1.0;
      std::vector<double> ns, vs;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].theta != th) continue;
        const double env = std::pow(items[i].n, expo);
        tab.add({std::string("correlation_scaling"), std::int64_t{items[i].n}, th, time_range(), sups[i], env, env - sups[i]});
        ns.push_back(items[i].n);
        vs.push_back(sups[i]);
      }
      const double slope = fit_loglog(ns, vs).slope;
      tab.add({std::string("correlation_scaling_slope"), std::int64_t{0}, th, time_range(), slope, expo,
               cfg_.tol.slope - std::abs(slope - expo)});
      check_close("boundary correlation slope theta=" + fmt(th),
                  "boundary-row correlation bound n^theta/n^2 (theta<=1), 1/n (theta>=1)", expo, slope, cfg_.tol.slope);
    }
  }

  void stationary_order(CsvTable& tab) {
    for (double th : cfg_.theta) {
      std::vector<double> ns, vs;
      const double expo = -std::max(1.0, th);
      for (int n : cfg_.n) {
        if (n < 4) continue;
        const double v = stationary_correlation(params(n, th)).max_abs();
        const double env = std::pow(n, expo);
        tab.add({std::string("stationary_order"), std::int64_t{n}, th, std::string("stationary"), v, env, env - v});
        ns.push_back(n);
        vs.push_back(v);
      }
      if (ns.size() < 2) continue;
      const double slope = fit_loglog(ns, vs).slope;
      tab.add({std::string("stationary_order_slope"), std::int64_t{0}, th, std::string("stationary"), slope, expo,
               cfg_.tol.slope - std::abs(slope - expo)});
      check_close("stationary correlation order slope theta=" + fmt(th), "max |phi_ss| of order 1/(n v n^theta)", expo,
                  slope, cfg_.tol.slope);
    }
  }

  void occupation(CsvTable& tab) {
    for (int n : cfg_.n)
      for (double th : cfg_.theta) {
        const SystemParams p = params(n, th);
        const auto op = DiscreteOperator::absorbed_triangle(p);
        std::vector<int> target;
        for (int z = 1; z + 1 < n; ++z) target.push_back(op.state_of(z, z + 1));
        const auto sol = solve_occupation(op, target);
        double worst = th == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        double tmax = 0;
        for (int x = 1; x < n; ++x)
          for (int y = x + 1; y < n; ++y) {
            const double t = sol.times[op.state_of(x, y)];
            const double base = static_cast<double>(x) * (n - y) / (n - 1);
            tmax = std::max(tmax, t);
            worst = th == 0.0 ? std::max(worst, std::abs(t - base)) : std::min(worst, base + p.n_pow_theta() - t);
          }
        if (th == 0.0) {
          tab.add({std::string("occupation_exact"), std::int64_t{n}, th, std::string("inf"), tmax, 0.0, cfg_.tol.abs - worst});
          check_close("diagonal occupation closed form " + tag(n, th), "diagonal occupation time x(n-y)/(n-1)", 0.0, worst,
                      cfg_.tol.abs);
        } else {
          tab.add({std::string("occupation_bound"), std::int64_t{n}, th, std::string("inf"), tmax, p.n_pow_theta(), worst});
          check_lower("diagonal occupation bound " + tag(n, th), "occupation time at most x(n-y)/(n-1) + n^theta", 0.0,
                      worst, cfg_.tol.abs);
        }
        check_upper("occupation solve residual " + tag(n, th), "linear solve of the occupation system", 0.0, sol.residual,
                    1e-10);
      }
  }

  void coupling(CsvTable& tab) {
    for (int n : cfg_.n)
      for (double th : cfg_.theta) {
        const auto r = coupling_bound_check(params(n, th), cfg_.times);
        tab.add({std::string("coupling_general"), std::int64_t{n}, th, time_range(), r.min_margin_general, 0.0,
                 r.min_margin_general});
        tab.add({std::string("coupling_diagonal"), std::int64_t{n}, th, time_range(), r.min_margin_diagonal, 0.0,
                 r.min_margin_diagonal});
        tab.add({std::string("coupling_integrated"), std::int64_t{n}, th, time_range(), r.min_margin_integrated, 0.0,
                 r.min_margin_integrated});
        if (r.first_violation_t >= 0)
          rep_.provenance["coupling_first_violation." + tag(n, th)] =
              "t=" + fmt(r.first_violation_t) + " worst (y,z)=(" + std::to_string(r.worst_y) + "," +
              std::to_string(r.worst_z) + ") at t=" + fmt(r.worst_t);
        check_lower("level coupling three-term margin " + tag(n, th), "kernel coupling inequality between theta and 0",
                    0.0, r.min_margin_general, cfg_.tol.abs);
        check_lower("level coupling diagonal margin " + tag(n, th), "kernel coupling inequality on the diagonal", 0.0,
                    r.min_margin_diagonal, cfg_.tol.abs);
      }
  }

  void reflected(CsvTable& tab) {
    for (int dim : {1, 2}) {
      std::vector<double> ns, vs;
      for (int n : cfg_.n) {
        const auto r = dim == 1 ? reflected_occupation_bound_1d(n, cfg_.times) : reflected_occupation_bound_2d(n, cfg_.times);
        const double t = cfg_.times.back();
        const double env = dim == 1 ? (13.0 * t + 3.0) / 2.0 : (4.0 * t + 6.0) * n / (2.0 * n - 6.0);
        const std::string name = dim == 1 ? "reflected_1d" : "reflected_2d";
        tab.add({name, std::int64_t{n}, 0.0, time_range(), r.scaled_sup, env, env - r.scaled_sup});
        if (dim == 2 && n > 3)
          check_upper("reflected planar occupation envelope n=" + std::to_string(n),
                      "planar reflected walk occupation of the diagonal, (4t+6)n/(2n-6)", env, r.scaled_sup, 0.0);
        ns.push_back(n);
        vs.push_back(r.scaled_sup / n);
      }
      const double slope = fit_loglog(ns, vs).slope;
      tab.add({std::string(dim == 1 ? "reflected_1d_slope" : "reflected_2d_slope"), std::int64_t{0}, 0.0, time_range(),
               slope, -1.0, cfg_.tol.slope - std::abs(slope + 1.0)});
      check_close(std::string("reflected ") + (dim == 1 ? "line" : "planar") + " occupation slope",
                  dim == 1 ? "reflected line walk occupation of {1, n-1} is O(1/n)"
                           : "reflected planar walk occupation of the diagonal is O(1/n)",
                  -1.0, slope, cfg_.tol.slope);
    }
  }

  void holder(CsvTable& tab) {
    std::vector<double> taus;
    for (double tau = 1.0 / (4096.0 * 4096.0); tau <= 1.0 / 64.0 * (1 + 1e-12); tau *= 2.0) taus.push_back(tau);
    for (double th : cfg_.theta) {
      const auto r = holder_exponent_check(th, cfg_.n, taus);
      const double need = 1.0 + r.delta - 0.1;
      for (std::size_t i = 0; i < r.taus.size(); ++i)
        tab.add({std::string("holder_envelope"), std::int64_t{0}, th, fmt(r.taus[i]), r.envelope[i], 0.0, 0.0});
      tab.add({std::string("holder_exponent"), std::int64_t{0}, th, fmt(taus.front()) + ":" + fmt(taus.back()), r.exponent,
               need, r.exponent - need});
      check_lower("tightness exponent theta=" + fmt(th), "time-regularity exponent 1 + delta_theta", need, r.exponent, 0.0);
    }
  }

  void double_integral(CsvTable& tab) {
    for (int n : cfg_.n) {
      double worst = std::numeric_limits<double>::infinity();
      for (double t : cfg_.times) {
        const double v = double_time_integral(1, t, n);
        const double env = 2.0 * t / (static_cast<double>(n) * n);
        tab.add({std::string("double_time_integral"), std::int64_t{n}, 0.0, fmt(t), v, env, env - v});
        worst = std::min(worst, env - v);
      }
      check_lower("double time integral n=" + std::to_string(n), "double time integral of the Dirichlet kernel <= 2t/n^2",
                  0.0, worst, 0.0);
    }
  }

  void gradient(CsvTable& tab) {
    for (double th : cfg_.theta) {
      double first = 0, worst = 0;
      for (int n : cfg_.n) {
        const SystemParams p = params(n, th);
        const auto g = discrete_gradient_check(p, sample_profile(p, initial_profile(cfg_, th)), cfg_.times);
        tab.add({std::string("discrete_gradient"), std::int64_t{n}, th, time_range(), g.scaled_max, 0.0, 0.0});
        if (first == 0) first = g.scaled_max;
        worst = std::max(worst, g.scaled_max);
      }
      check_upper("discrete gradient growth theta=" + fmt(th), "n |rho(x+1) - rho(x)| bounded uniformly in n",
                  1.2 * first, worst, 1e-12);
    }
  }

  // ----------------------------------------------------------------- verify
  void verify() {
    for (int n : cfg_.n)
      for (double th : cfg_.theta) {
        const auto t0 = Clock::now();
        const SystemParams p = params(n, th);
        double residual = 0;
        const MasterState ss = stationary_distribution(p, &residual);
        check_upper("stationary solve residual " + tag(n, th), "unique stationary law of the finite chain", 0.0, residual,
                    1e-11 * std::max(1.0, p.n_sq()));
        const auto obs = exact_observables(ss, p);
        const ProfileVector rho = stationary_profile(p);
        double dp = 0;
        for (int x = 1; x < n; ++x) dp = std::max(dp, std::abs(obs.profile[x] - rho[x]));
        check_close("stationary profile " + tag(n, th), "matrix ansatz: linear stationary profile", 0.0, dp, cfg_.tol.abs);
        if (n >= 4) {
          const CorrelationField phi = stationary_correlation(p);
          double dc = 0;
          for (int x = 1; x < n; ++x)
            for (int y = x + 1; y < n; ++y) dc = std::max(dc, std::abs(obs.correlation(x, y) - phi(x, y)));
          check_close("stationary correlation " + tag(n, th), "matrix ansatz: stationary two-point function", 0.0, dc,
                      cfg_.tol.abs);
        }
        if (n <= 10 && p.alpha != p.beta) {
          const auto pc = partition_function_check(p);
          check_close("partition function ratio chain " + tag(n, th), "partition function as a Gamma ratio", 0.0,
                      pc.relative_error, 1e-12);
        }
        if (n <= 10) {
          const auto rho0fn = initial_profile(cfg_, th);
          const ProfileVector rho0 = sample_profile(p, rho0fn);
          std::vector<double> marg(rho0.values.begin() + 1, rho0.values.end() - 1);
          const MasterState s0 = MasterState::product(marg);
          check_upper("space-time correlation representation " + tag(n, th),
                      "space-time correlation through the absorbed kernel", 0.0, duhamel_check(p, 0.2, 0.7, 1, s0), 1e-8);
          const std::vector<double> ts = cfg_.times.empty() ? std::vector<double>{0.1, 0.5} : cfg_.times;
          const auto prof = evolve_profile(rho0, p, ts);
          const auto phis = evolve_correlation(CorrelationField(n, 0.0), ProfilePath(p, rho0), p, ts);
          double ep = 0, ec = 0;
          for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto o = exact_observables(evolve_distribution(s0, p, ts[i]), p);
            for (int x = 1; x < n; ++x) {
              ep = std::max(ep, std::abs(o.profile[x] - prof[i][x]));
              for (int y = x + 1; y < n; ++y) ec = std::max(ec, std::abs(o.correlation(x, y) - phis[i](x, y)));
            }
          }
          check_close("profile evolution vs master equation " + tag(n, th),
                      "discrete heat equation closes the one-point function", 0.0, ep, 1e-6);
          check_close("correlation evolution vs master equation " + tag(n, th),
                      "two-point equation with gradient-squared source", 0.0, ec, 1e-6);
        }
        rep_.timing.emplace_back(tag(n, th), seconds_since(t0));
      }
  }

  // --------------------------------------------------------------- spectrum
  void spectrum() {
    CsvTable kern{{"n", "x", "y", "t", "spectral", "ode", "abs_diff"}, {}};
    const std::vector<double> ts = cfg_.times.empty() ? std::vector<double>{0.01, 0.1, 1.0} : cfg_.times;
    for (int n : cfg_.n) {
      check_close("cosine sum n=" + std::to_string(n), "sum of cos(l pi / n) over l vanishes", 0.0, cosine_sum_check(n),
                  1e-12);
      const auto kt = absorbed_kernel(SystemParams{n, 0.0, cfg_.alpha, cfg_.beta}, ts);
      double worst = 0;
      for (std::size_t i = 0; i < ts.size(); ++i)
        for (int x = 1; x < n; ++x)
          for (int y = 1; y < n; ++y) {
            const double s = heat_kernel_dirichlet(x, y, ts[i], n), o = kt[i](x - 1, y - 1);
            worst = std::max(worst, std::abs(s - o));
            if (x == 1 || x == n / 2) kern.add({std::int64_t{n}, std::int64_t{x}, std::int64_t{y}, ts[i], s, o, std::abs(s - o)});
          }
      check_close("Dirichlet kernel spectral vs ODE n=" + std::to_string(n), "spectral form of the Dirichlet heat kernel",
                  0.0, worst, 1e-8);
    }
    write(kern, "kernel.csv");

    CsvTable roots{{"mu", "family", "index", "root", "eigenvalue", "bracket_lo", "bracket_hi"}, {}};
    const std::vector<double> mus = cfg_.mu.empty() ? std::vector<double>{1.0} : cfg_.mu;
    for (double mu : mus) {
      const auto sp = robin_spectrum(mu, cfg_.modes);
      double outside = 0;
      for (const auto* fam : {&sp.symmetric, &sp.antisymmetric})
        for (const auto& m : *fam) {
          roots.add({mu, std::string(m.symmetric ? "symmetric" : "antisymmetric"), std::int64_t{m.index}, m.root,
                     m.eigenvalue, m.bracket_lo, m.bracket_hi});
          outside = std::max({outside, m.bracket_lo - m.root, m.root - m.bracket_hi});
        }
      check_upper("Robin roots inside brackets mu=" + fmt(mu), "Robin eigenvalue brackets", 0.0, outside, 0.0);
      check_close("Robin interlacing mu=" + fmt(mu), "symmetric and antisymmetric Robin roots interlace", 1.0,
                  sp.interlaced ? 1.0 : 0.0, 0.0);
      validate_basis(BoundaryRegime{RegimeKind::Robin, mu});
    }
    validate_basis(BoundaryRegime{RegimeKind::Dirichlet, 0.0});
    validate_basis(BoundaryRegime{RegimeKind::Neumann, 0.0});
    write(roots, "spectrum.csv");
  }

  void validate_basis(const BoundaryRegime& reg) {
    const auto b = ContinuumBasis::build(reg, cfg_.modes);
    const auto& v = b->validation();
    check_upper("orthonormality " + reg.name(), "continuum eigenbasis", 0.0, v.orthonormality, 1e-8);
    check_upper("eigen residual " + reg.name(), "continuum eigenbasis", 0.0, v.eigen_residual, 1e-6);
    check_upper("boundary residual " + reg.name(), "boundary conditions of the regime", 0.0, v.boundary_residual, 1e-8);
  }

  const ExperimentConfig& cfg_;
  unsigned jobs_;
  RunReport rep_;
};

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, Mode mode, unsigned jobs) {
  return Runner(cfg, mode, jobs).run();
}

int run(const RunRequest& req) {
  ExperimentConfig cfg;
  std::string seed_source = "config";
  try {
    cfg = load_config(req.config);
    if (req.seed) {
      cfg.seed = *req.seed;
      seed_source = "--seed";
    } else if (const char* env = std::getenv("SSEPLAB_SEED"); env && *env) {
      try {
        cfg.seed = parse_seed(env);
      } catch (const std::exception& e) {
        throw ConfigError("SSEPLAB_SEED", e.what());
      }
      seed_source = "SSEPLAB_SEED";
    }
    if (req.out) cfg.output = *req.out;
    validate_for_mode(cfg, req.mode);
  } catch (const ConfigError& e) {
    std::cerr << "sseplab: config error in " << e.what() << "\n";
    return 2;
  }

  const auto wall0 = std::chrono::system_clock::now();
  RunReport rep;
  try {
    rep = run_experiment(cfg, req.mode, req.jobs);
  } catch (const std::exception& e) {
    std::cerr << "sseplab: " << e.what() << "\n";
    return 1;
  }
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.source_text)));
  std::ostringstream grid;
  grid << "n=[";
  for (std::size_t i = 0; i < cfg.n.size(); ++i) grid << (i ? "," : "") << cfg.n[i];
  grid << "] theta=[";
  for (std::size_t i = 0; i < cfg.theta.size(); ++i) grid << (i ? "," : "") << fmt(cfg.theta[i]);
  grid << "] alpha=" << fmt(cfg.alpha) << " beta=" << fmt(cfg.beta);
  rep.provenance["config"] = req.config.string();
  rep.provenance["config_hash_fnv1a64"] = hash;
  rep.provenance["grid"] = grid.str();
  rep.provenance["seed"] = std::to_string(cfg.seed) + " (" + seed_source + ")";
  rep.provenance["replicas"] = std::to_string(cfg.replicas);
  rep.provenance["jobs"] = std::to_string(resolve_jobs(req.jobs));
  rep.provenance["version"] = version_string();
  rep.provenance["initial_profile"] = cfg.initial.shape;
  if (rep.mode == Mode::Correlations || rep.mode == Mode::Bounds)
    rep.provenance["initial_correlations"] = "product law (phi_0 = 0)";
  const std::time_t started = std::chrono::system_clock::to_time_t(wall0);
  char when[32];
  std::tm tm{};
  gmtime_r(&started, &tm);
  std::strftime(when, sizeof when, "%Y-%m-%dT%H:%M:%SZ", &tm);
  rep.provenance["started"] = when;
  try {
    rep.write(cfg.output / "report.txt");
  } catch (const std::exception& e) {
    std::cerr << "sseplab: " << e.what() << "\n";
    return 1;
  }
  for (const auto& r : rep.checks)
    if (!r.pass) std::cerr << "FAIL " << r.name << " (margin " << r.margin << ")\n";
  if (rep.incomplete) std::cerr << "sseplab: run incomplete: " << rep.failure << "\n";
  std::cout << mode_name(rep.mode) << ": " << (rep.all_pass() ? "PASS" : rep.incomplete ? "INCOMPLETE" : "FAIL") << ", "
            << rep.checks.size() << " checks, report " << (cfg.output / "report.txt").string() << "\n";
  return rep.all_pass() ? 0 : 1;
}

}  // namespace sseplab
