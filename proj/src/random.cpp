#include "sseplab/random.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sseplab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t parse_seed(std::string_view text) {
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    text.remove_prefix(2);
    base = 16;
  }
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw std::invalid_argument("invalid seed: '" + std::string(text) + "'");
  return value;
}

RandomStream::RandomStream(RandomSource src) {
  const std::uint64_t a = splitmix64(src.seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(src.stream_id + 0x632be59bd9b4e019ull));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(src.stream_id),
                    static_cast<std::uint32_t>(src.stream_id >> 32)};
  engine_.seed(seq);
}

double RandomStream::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

}  // namespace sseplab
