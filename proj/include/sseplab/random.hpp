#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sseplab {

struct RandomSource {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  RandomSource with_stream(std::uint64_t id) const { return {seed, id}; }
};

// Accepts decimal or 0x-prefixed hexadecimal.
std::uint64_t parse_seed(std::string_view text);

class RandomStream {
 public:
  explicit RandomStream(RandomSource src);

  // [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential(double rate);
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sseplab
