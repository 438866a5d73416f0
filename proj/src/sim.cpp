#include "sseplab/sim.hpp"

#include "sseplab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

namespace sseplab {

namespace {

constexpr std::size_t kReplicaBlock = 256;

void require_compatible(const Configuration& c, const SystemParams& p) {
  if (!c.compatible(p)) throw std::invalid_argument("configuration size does not match n");
}

}  // namespace

unsigned resolve_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

RateTable event_rates(const Configuration& config, const SystemParams& p) {
  require_compatible(config, p);
  const double n2 = p.n_sq();
  const double slow = p.slow_factor();
  RateTable r;
  r.bonds.resize(static_cast<std::size_t>(p.n - 2));
  for (int x = 1; x + 1 < p.n; ++x) r.bonds[static_cast<std::size_t>(x - 1)] = config[x] != config[x + 1] ? n2 : 0.0;
  r.left_flip = n2 * slow * (config[1] ? 1.0 - p.alpha : p.alpha);
  r.right_flip = n2 * slow * (config[p.n - 1] ? 1.0 - p.beta : p.beta);
  r.total = r.left_flip + r.right_flip;
  for (double b : r.bonds) r.total += b;
  return r;
}

std::size_t pick_event(std::span<const double> rates, double total, RandomStream& rng) {
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (u < rates[i]) return i;
    u -= rates[i];
  }
  // rounding fallback: last event with positive rate
  for (std::size_t i = rates.size(); i-- > 0;)
    if (rates[i] > 0) return i;
  throw std::logic_error("pick_event: all rates vanish");
}

StepResult gillespie_step(const Configuration& config, const SystemParams& p, RandomStream& rng) {
  const RateTable r = event_rates(config, p);
  const double dt = rng.exponential(r.total);
  std::vector<double> all(r.bonds);
  all.push_back(r.left_flip);
  all.push_back(r.right_flip);
  const std::size_t k = pick_event(all, r.total, rng);
  StepResult out{config, dt, {dt, EventKind::Exchange, 0}};
  if (k < r.bonds.size()) {
    const int x = static_cast<int>(k) + 1;
    out.config.exchange(x);
    out.event = {dt, EventKind::Exchange, x};
  } else if (k == r.bonds.size()) {
    out.config.flip(1);
    out.event = {dt, EventKind::FlipLeft, 1};
  } else {
    out.config.flip(p.n - 1);
    out.event = {dt, EventKind::FlipRight, p.n - 1};
  }
  return out;
}

ExclusionProcess::ExclusionProcess(const SystemParams& p, Configuration start)
    : p_(p), config_(std::move(start)), n2_(p.n_sq()), slow_(p.slow_factor()) {
  p.validate();
  require_compatible(config_, p);
  position_.assign(static_cast<std::size_t>(p.n), -1);
  for (int x = 1; x + 1 < p.n; ++x)
    if (config_[x] != config_[x + 1]) toggle_bond(x);
  refresh_boundary();
}

void ExclusionProcess::toggle_bond(int x) {
  auto& pos = position_[static_cast<std::size_t>(x)];
  if (pos < 0) {
    pos = static_cast<int>(discrepant_.size());
    discrepant_.push_back(x);
  } else {
    const int last = discrepant_.back();
    discrepant_[static_cast<std::size_t>(pos)] = last;
    position_[static_cast<std::size_t>(last)] = pos;
    discrepant_.pop_back();
    pos = -1;
  }
}

void ExclusionProcess::refresh_boundary() {
  left_ = n2_ * slow_ * (config_[1] ? 1.0 - p_.alpha : p_.alpha);
  right_ = n2_ * slow_ * (config_[p_.n - 1] ? 1.0 - p_.beta : p_.beta);
}

double ExclusionProcess::total_rate() const { return n2_ * static_cast<double>(discrepant_.size()) + left_ + right_; }

Event ExclusionProcess::fire(double u) {
  const double bulk = n2_ * static_cast<double>(discrepant_.size());
  const int n = p_.n;
  if (u < bulk) {
    const auto k = std::min(discrepant_.size() - 1, static_cast<std::size_t>(u / n2_));
    const int x = discrepant_[k];
    config_.exchange(x);
    if (x > 1) toggle_bond(x - 1);
    if (x + 2 < n) toggle_bond(x + 1);
    if (x == 1 || x + 1 == n - 1) refresh_boundary();
    return {time_, EventKind::Exchange, x};
  }
  if (u < bulk + left_) {
    config_.flip(1);
    toggle_bond(1);
    refresh_boundary();
    return {time_, EventKind::FlipLeft, 1};
  }
  config_.flip(n - 1);
  toggle_bond(n - 2);
  refresh_boundary();
  return {time_, EventKind::FlipRight, n - 1};
}

Event ExclusionProcess::step(RandomStream& rng) {
  const double total = total_rate();
  time_ += rng.exponential(total);
  return fire(rng.uniform() * total);
}

void ExclusionProcess::advance_to(double t_end, RandomStream& rng, std::vector<Event>* log) {
  if (t_end < time_) throw std::invalid_argument("advance_to: target time is in the past");
  for (;;) {
    const double total = total_rate();
    const double dt = rng.exponential(total);
    if (time_ + dt > t_end) {
      time_ = t_end;
      return;
    }
    time_ += dt;
    const Event ev = fire(rng.uniform() * total);
    if (log) log->push_back(ev);
  }
}

Configuration simulate_until(const Configuration& config0, const SystemParams& p, double t_end, RandomStream& rng) {
  if (t_end < 0) throw std::invalid_argument("simulate_until: t_end must be >= 0");
  ExclusionProcess proc(p, config0);
  proc.advance_to(t_end, rng);
  return proc.state();
}

Trajectory simulate_trajectory(const Configuration& config0, const SystemParams& p, double t_end, RandomStream& rng) {
  if (t_end < 0) throw std::invalid_argument("simulate_trajectory: t_end must be >= 0");
  ExclusionProcess proc(p, config0);
  Trajectory tr{p, {}, {}};
  proc.advance_to(t_end, rng, &tr.events);
  tr.final_state = proc.state();
  return tr;
}

double default_burn_in(const SystemParams& p) { return 10.0 * std::max(1.0, std::pow(p.n, p.theta - 1.0)); }

InitialLaw InitialLaw::deterministic(Configuration c) {
  InitialLaw l;
  l.kind_ = Kind::Deterministic;
  l.config_ = std::move(c);
  return l;
}

InitialLaw InitialLaw::product(std::vector<double> marginals) {
  for (double m : marginals)
    if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("product law: marginals must lie in [0,1]");
  InitialLaw l;
  l.kind_ = Kind::LocalGibbs;
  l.marginals_ = std::move(marginals);
  return l;
}

InitialLaw InitialLaw::local_gibbs(const SystemParams& p, const std::function<double(double)>& rho0) {
  std::vector<double> m(static_cast<std::size_t>(p.n - 1));
  for (int x = 1; x < p.n; ++x) m[static_cast<std::size_t>(x - 1)] = rho0(static_cast<double>(x) / p.n);
  return product(std::move(m));
}

InitialLaw InitialLaw::stationary(const SystemParams& p, std::optional<double> burn_in) {
  const ProfileVector ss = stationary_profile(p);
  InitialLaw l = product(std::vector<double>(ss.values.begin() + 1, ss.values.end() - 1));
  l.kind_ = Kind::Stationary;
  l.burn_in_ = burn_in.value_or(default_burn_in(p));
  if (l.burn_in_ < 0) throw std::invalid_argument("burn-in must be >= 0");
  return l;
}

Configuration InitialLaw::sample(const SystemParams& p, RandomStream& rng) const {
  if (kind_ == Kind::Deterministic) {
    require_compatible(config_, p);
    return config_;
  }
  if (static_cast<int>(marginals_.size()) != p.n - 1) throw std::invalid_argument("initial law size does not match n");
  std::vector<std::uint8_t> occ(marginals_.size());
  for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = rng.bernoulli(marginals_[i]) ? 1 : 0;
  Configuration c(std::move(occ));
  if (kind_ == Kind::Stationary && burn_in_ > 0) c = simulate_until(c, p, burn_in_, rng);
  return c;
}

namespace {

void require_replicas(const EnsembleOptions& o) {
  if (o.replicas < 1) throw std::invalid_argument("replicas must be >= 1");
}

// Occupation counts are integers, so block merges are exact.
struct OccupationCounts {
  std::vector<std::uint64_t> site;  // [time][x-1]
};

}  // namespace

std::vector<ProfileEstimate> estimate_profile(const SystemParams& p, const InitialLaw& law,
                                              std::span<const double> times, const EnsembleOptions& opts) {
  p.validate();
  require_replicas(opts);
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0 || (i > 0 && times[i] < times[i - 1]))
      throw std::invalid_argument("estimate_profile: times must be nonnegative and nondecreasing");
  const std::size_t m = static_cast<std::size_t>(p.n - 1);
  const std::size_t nt = times.size();
  auto blocks = run_blocks<OccupationCounts>(opts.replicas, kReplicaBlock, opts.jobs, [&](std::size_t b, std::size_t e) {
    OccupationCounts acc;
    acc.site.assign(nt * m, 0);
    for (std::size_t r = b; r < e; ++r) {
      RandomStream rng(opts.source.with_stream(r));
      ExclusionProcess proc(p, law.sample(p, rng));
      for (std::size_t k = 0; k < nt; ++k) {
        proc.advance_to(times[k], rng);
        const auto& c = proc.state();
        for (std::size_t x = 0; x < m; ++x) acc.site[k * m + x] += static_cast<std::uint64_t>(c[static_cast<int>(x) + 1]);
      }
    }
    return acc;
  });
  std::vector<std::uint64_t> total(nt * m, 0);
  for (const auto& b : blocks)
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += b.site[i];

  const double R = static_cast<double>(opts.replicas);
  std::vector<ProfileEstimate> out;
  for (std::size_t k = 0; k < nt; ++k) {
    ProfileEstimate est;
    est.time = times[k];
    est.replicas = opts.replicas;
    est.mean.time = times[k];
    est.mean.values.assign(static_cast<std::size_t>(p.n + 1), 0.0);
    est.std_error.assign(static_cast<std::size_t>(p.n + 1), 0.0);
    est.mean.values.front() = p.alpha;
    est.mean.values.back() = p.beta;
    for (std::size_t x = 0; x < m; ++x) {
      const double mean = static_cast<double>(total[k * m + x]) / R;
      est.mean.values[x + 1] = mean;
      est.std_error[x + 1] = opts.replicas > 1 ? std::sqrt(mean * (1.0 - mean) / (R - 1.0)) : 0.0;
    }
    out.push_back(std::move(est));
  }
  return out;
}

ProfileEstimate estimate_profile(const SystemParams& p, const InitialLaw& law, double t, const EnsembleOptions& opts) {
  return estimate_profile(p, law, std::span<const double>(&t, 1), opts).front();
}

CorrelationEstimate estimate_two_point(const SystemParams& p, const InitialLaw& law, double t,
                                       const EnsembleOptions& opts) {
  p.validate();
  require_replicas(opts);
  if (t < 0) throw std::invalid_argument("estimate_two_point: t must be >= 0");
  const int n = p.n;
  const std::size_t w = static_cast<std::size_t>(n + 1);
  struct Counts {
    std::vector<std::uint64_t> single, pair;
  };
  auto blocks = run_blocks<Counts>(opts.replicas, kReplicaBlock, opts.jobs, [&](std::size_t b, std::size_t e) {
    Counts acc;
    acc.single.assign(w, 0);
    acc.pair.assign(w * w, 0);
    std::vector<int> occupied;
    for (std::size_t r = b; r < e; ++r) {
      RandomStream rng(opts.source.with_stream(r));
      ExclusionProcess proc(p, law.sample(p, rng));
      proc.advance_to(t, rng);
      occupied.clear();
      for (int x = 1; x < n; ++x)
        if (proc.state()[x]) occupied.push_back(x);
      for (std::size_t i = 0; i < occupied.size(); ++i) {
        ++acc.single[static_cast<std::size_t>(occupied[i])];
        for (std::size_t j = i + 1; j < occupied.size(); ++j)
          ++acc.pair[static_cast<std::size_t>(occupied[i]) * w + static_cast<std::size_t>(occupied[j])];
      }
    }
    return acc;
  });
  Counts total{std::vector<std::uint64_t>(w, 0), std::vector<std::uint64_t>(w * w, 0)};
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < w; ++i) total.single[i] += b.single[i];
    for (std::size_t i = 0; i < w * w; ++i) total.pair[i] += b.pair[i];
  }

  const double R = static_cast<double>(opts.replicas);
  CorrelationEstimate est;
  est.time = t;
  est.replicas = opts.replicas;
  est.profile.time = t;
  est.profile.replicas = opts.replicas;
  est.profile.mean.time = t;
  est.profile.mean.values.assign(w, 0.0);
  est.profile.std_error.assign(w, 0.0);
  est.profile.mean.values.front() = p.alpha;
  est.profile.mean.values.back() = p.beta;
  std::vector<double> m(w, 0.0);
  for (int x = 1; x < n; ++x) {
    m[static_cast<std::size_t>(x)] = static_cast<double>(total.single[static_cast<std::size_t>(x)]) / R;
    est.profile.mean.values[static_cast<std::size_t>(x)] = m[static_cast<std::size_t>(x)];
    est.profile.std_error[static_cast<std::size_t>(x)] =
        opts.replicas > 1 ? std::sqrt(chi(m[static_cast<std::size_t>(x)]) / (R - 1.0)) : 0.0;
  }
  est.value = CorrelationField(n, t);
  est.std_error = CorrelationField(n, t);
  const double unbias = opts.replicas > 1 ? R / (R - 1.0) : 1.0;
  for (int x = 1; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      const double a = m[static_cast<std::size_t>(x)], b = m[static_cast<std::size_t>(y)];
      const double ab = static_cast<double>(total.pair[static_cast<std::size_t>(x) * w + static_cast<std::size_t>(y)]) / R;
      const double cov = ab - a * b;
      est.value.at(x, y) = cov * unbias;
      // E[(A-a)^2 (B-b)^2] for binary A, B from first and joint moments
      const double z2 = (1 - 2 * a) * (1 - 2 * b) * ab + (1 - 2 * a) * b * b * a + a * a * (1 - 2 * b) * b + a * a * b * b;
      const double var = std::max(0.0, z2 - cov * cov);
      est.std_error.at(x, y) = opts.replicas > 1 ? std::sqrt(var / (R - 1.0)) : 0.0;
    }
  return est;
}

double fluctuation_field(const Configuration& eta, const ProfileVector& rho, const TestFn& f) {
  const int n = rho.n();
  double s = 0;
  for (int x = 1; x < n; ++x) s += f(static_cast<double>(x) / n) * (eta[x] - rho[x]);
  return s / std::sqrt(static_cast<double>(n));
}

CovarianceReport estimate_field_covariance(const SystemParams& p, const InitialLaw& law, double s, double t,
                                           std::span<const TestFn> fs, std::span<const TestFn> gs,
                                           const Centering& centering, const EnsembleOptions& opts) {
  p.validate();
  require_replicas(opts);
  if (s < 0 || t < s) throw std::invalid_argument("estimate_field_covariance: need 0 <= s <= t");
  if (fs.empty() || gs.empty()) throw std::invalid_argument("estimate_field_covariance: empty test-function family");
  auto need = [&](double time) {
    auto r = centering ? centering(time) : std::nullopt;
    if (!r) {
      std::ostringstream os;
      os << "centering profile unavailable at t=" << time;
      throw std::invalid_argument(os.str());
    }
    if (r->n() != p.n) throw std::invalid_argument("centering profile size does not match n");
    return *r;
  };
  const ProfileVector rho_s = need(s);
  const ProfileVector rho_t = need(t);

  // tabulate f(x/n) once
  const int n = p.n;
  auto tabulate = [&](std::span<const TestFn> fam) {
    Eigen::MatrixXd tab(static_cast<Eigen::Index>(fam.size()), n - 1);
    for (std::size_t i = 0; i < fam.size(); ++i)
      for (int x = 1; x < n; ++x) tab(static_cast<Eigen::Index>(i), x - 1) = fam[i](static_cast<double>(x) / n);
    return tab;
  };
  const Eigen::MatrixXd tf = tabulate(fs), tg = tabulate(gs);
  const Eigen::Index nf = tf.rows(), ng = tg.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));

  using Accs = std::vector<MomentAccumulator>;
  auto blocks = run_blocks<Accs>(opts.replicas, kReplicaBlock, opts.jobs, [&](std::size_t b, std::size_t e) {
    Accs acc(static_cast<std::size_t>(nf * ng));
    Eigen::VectorXd centred(n - 1);
    for (std::size_t r = b; r < e; ++r) {
      RandomStream rng(opts.source.with_stream(r));
      ExclusionProcess proc(p, law.sample(p, rng));
      proc.advance_to(s, rng);
      for (int x = 1; x < n; ++x) centred[x - 1] = proc.state()[x] - rho_s[x];
      const Eigen::VectorXd ys = scale * (tf * centred);
      proc.advance_to(t, rng);
      for (int x = 1; x < n; ++x) centred[x - 1] = proc.state()[x] - rho_t[x];
      const Eigen::VectorXd yt = scale * (tg * centred);
      for (Eigen::Index i = 0; i < nf; ++i)
        for (Eigen::Index j = 0; j < ng; ++j) acc[static_cast<std::size_t>(i * ng + j)].add(ys[i] * yt[j]);
    }
    return acc;
  });
  Accs total(static_cast<std::size_t>(nf * ng));
  for (const auto& b : blocks)
    for (std::size_t i = 0; i < total.size(); ++i) total[i].merge(b[i]);

  CovarianceReport rep;
  rep.s = s;
  rep.t = t;
  rep.replicas = opts.replicas;
  rep.burn_in = law.kind() == InitialLaw::Kind::Stationary ? law.burn_in() : 0.0;
  rep.estimate.resize(nf, ng);
  rep.std_error.resize(nf, ng);
  for (Eigen::Index i = 0; i < nf; ++i)
    for (Eigen::Index j = 0; j < ng; ++j) {
      const auto e = total[static_cast<std::size_t>(i * ng + j)].estimate();
      rep.estimate(i, j) = e.mean;
      rep.std_error(i, j) = e.std_error;
    }
  return rep;
}

}  // namespace sseplab
