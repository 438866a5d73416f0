#include "sseplab/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sseplab {

void SystemParams::validate() const {
  if (n < 3) throw std::invalid_argument("n must be >= 3, got " + std::to_string(n));
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("theta must be finite and >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
}

double SystemParams::slow_factor() const { return std::pow(static_cast<double>(n), -theta); }

double SystemParams::n_pow_theta() const { return std::pow(static_cast<double>(n), theta); }

Configuration::Configuration(std::vector<std::uint8_t> occupancy) : occ_(std::move(occupancy)) {
  for (auto v : occ_)
    if (v > 1) throw std::invalid_argument("occupation values must be 0 or 1");
}

Configuration Configuration::empty(int n) {
  return Configuration(std::vector<std::uint8_t>(static_cast<std::size_t>(n - 1), 0));
}

Configuration Configuration::full(int n) {
  return Configuration(std::vector<std::uint8_t>(static_cast<std::size_t>(n - 1), 1));
}

Configuration Configuration::from_index(std::uint64_t index, int n) {
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(n - 1));
  for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = static_cast<std::uint8_t>((index >> i) & 1u);
  return Configuration(std::move(occ));
}

void Configuration::exchange(int x) {
  std::swap(occ_[static_cast<std::size_t>(x - 1)], occ_[static_cast<std::size_t>(x)]);
}

void Configuration::flip(int x) { occ_[static_cast<std::size_t>(x - 1)] ^= 1u; }

int Configuration::particles() const {
  int c = 0;
  for (auto v : occ_) c += v;
  return c;
}

std::uint64_t Configuration::to_index() const {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < occ_.size(); ++i) idx |= static_cast<std::uint64_t>(occ_[i]) << i;
  return idx;
}

}  // namespace sseplab
