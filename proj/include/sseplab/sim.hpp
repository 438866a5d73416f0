#pragma once

#include "sseplab/numerics.hpp"
#include "sseplab/params.hpp"
#include "sseplab/random.hpp"
#include "sseplab/stats.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace sseplab {

enum class EventKind { Exchange, FlipLeft, FlipRight };

// Macroscopic rates (n^2 speed-up folded in).
struct RateTable {
  std::vector<double> bonds;  // bond (x, x+1) at index x-1, x = 1..n-2
  double left_flip = 0.0;     // site 1
  double right_flip = 0.0;    // site n-1
  double total = 0.0;
};

RateTable event_rates(const Configuration& config, const SystemParams& p);

struct Event {
  double time;
  EventKind kind;
  int site;  // left site of the bond, or the flipped site
};

struct StepResult {
  Configuration config;
  double elapsed;
  Event event;
};

// Index of the event drawn with probability rates[i] / total.
std::size_t pick_event(std::span<const double> rates, double total, RandomStream& rng);

StepResult gillespie_step(const Configuration& config, const SystemParams& p, RandomStream& rng);

struct Trajectory {
  SystemParams params;
  std::vector<Event> events;
  Configuration final_state;
};

// Stateful engine keeping the set of discrepant bonds, O(1) per event.
class ExclusionProcess {
 public:
  ExclusionProcess(const SystemParams& p, Configuration start);

  const Configuration& state() const { return config_; }
  double time() const { return time_; }
  double total_rate() const;

  Event step(RandomStream& rng);
  // Runs up to macroscopic time t_end; the pending exponential clock is
  // discarded at t_end, which is exact by memorylessness.
  void advance_to(double t_end, RandomStream& rng, std::vector<Event>* log = nullptr);

 private:
  Event fire(double u);  // u uniform on [0, total_rate())
  void toggle_bond(int x);
  void refresh_boundary();

  SystemParams p_;
  Configuration config_;
  double time_ = 0.0;
  double n2_ = 0.0;
  double slow_ = 0.0;
  double left_ = 0.0, right_ = 0.0;
  std::vector<int> discrepant_;
  std::vector<int> position_;  // bond x -> slot in discrepant_, or -1
};

Configuration simulate_until(const Configuration& config0, const SystemParams& p, double t_end, RandomStream& rng);
Trajectory simulate_trajectory(const Configuration& config0, const SystemParams& p, double t_end, RandomStream& rng);

double default_burn_in(const SystemParams& p);

class InitialLaw {
 public:
  enum class Kind { Deterministic, LocalGibbs, Stationary };

  static InitialLaw deterministic(Configuration c);
  // Bernoulli product with P(eta(x) = 1) = marginals[x-1].
  static InitialLaw product(std::vector<double> marginals);
  // Bernoulli product with marginals rho0(x/n).
  static InitialLaw local_gibbs(const SystemParams& p, const std::function<double(double)>& rho0);
  // Bernoulli(rho_ss) product followed by a burn-in run.
  static InitialLaw stationary(const SystemParams& p, std::optional<double> burn_in = std::nullopt);

  Kind kind() const { return kind_; }
  double burn_in() const { return burn_in_; }
  const std::vector<double>& marginals() const { return marginals_; }

  Configuration sample(const SystemParams& p, RandomStream& rng) const;

 private:
  Kind kind_ = Kind::Deterministic;
  Configuration config_;
  std::vector<double> marginals_;
  double burn_in_ = 0.0;
};

struct EnsembleOptions {
  std::size_t replicas = 1000;
  RandomSource source{};
  unsigned jobs = 0;  // 0: available parallelism
};

struct ProfileEstimate {
  double time = 0.0;
  std::size_t replicas = 0;
  ProfileVector mean;
  std::vector<double> std_error;  // 0..n, zero at the reservoirs
};

struct CorrelationEstimate {
  double time = 0.0;
  std::size_t replicas = 0;
  ProfileEstimate profile;
  CorrelationField value;
  CorrelationField std_error;
};

ProfileEstimate estimate_profile(const SystemParams& p, const InitialLaw& law, double t, const EnsembleOptions& opts);
// Several times from the same replicas.
std::vector<ProfileEstimate> estimate_profile(const SystemParams& p, const InitialLaw& law,
                                              std::span<const double> times, const EnsembleOptions& opts);

CorrelationEstimate estimate_two_point(const SystemParams& p, const InitialLaw& law, double t,
                                       const EnsembleOptions& opts);

using TestFn = std::function<double(double)>;
// Returns the centering profile rho_t^n, or nothing when unavailable.
using Centering = std::function<std::optional<ProfileVector>(double)>;

struct CovarianceReport {
  double s = 0.0;
  double t = 0.0;
  std::size_t replicas = 0;
  double burn_in = 0.0;
  Eigen::MatrixXd estimate;   // E[Y_s(f_i) Y_t(g_j)]
  Eigen::MatrixXd std_error;
  std::optional<Eigen::MatrixXd> predicted;
};

// Y_t(f) = n^{-1/2} sum_x f(x/n) (eta_t(x) - rho_t(x)).
double fluctuation_field(const Configuration& eta, const ProfileVector& rho, const TestFn& f);

CovarianceReport estimate_field_covariance(const SystemParams& p, const InitialLaw& law, double s, double t,
                                           std::span<const TestFn> fs, std::span<const TestFn> gs,
                                           const Centering& centering, const EnsembleOptions& opts);

}  // namespace sseplab
