#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sseplab {

// Lattice is {0,...,n}; sites 1..n-1 carry particles, 0 and n are reservoirs.
// All public times are macroscopic: the generator is n^2 L_n.
struct SystemParams {
  int n = 3;
  double theta = 0.0;
  double alpha = 0.5;
  double beta = 0.5;

  void validate() const;

  double n_sq() const { return static_cast<double>(n) * n; }
  double slow_factor() const;  // n^-theta
  double n_pow_theta() const;  // n^theta
  int sites() const { return n - 1; }
};

inline double chi(double rho) { return rho * (1.0 - rho); }

class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<std::uint8_t> occupancy);

  static Configuration empty(int n);
  static Configuration full(int n);
  static Configuration from_index(std::uint64_t index, int n);

  int lattice_size() const { return static_cast<int>(occ_.size()) + 1; }
  int sites() const { return static_cast<int>(occ_.size()); }

  // site x in 1..n-1
  int operator[](int x) const { return occ_[static_cast<std::size_t>(x - 1)]; }

  void exchange(int x);  // bond (x, x+1)
  void flip(int x);

  int particles() const;
  std::uint64_t to_index() const;  // site x -> bit x-1
  std::span<const std::uint8_t> occupancy() const { return occ_; }

  bool compatible(const SystemParams& p) const { return sites() == p.n - 1; }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<std::uint8_t> occ_;
};

}  // namespace sseplab
