#include "tamed/random.hpp"

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

#include "tamed/errors.hpp"

namespace tamed {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream) {
  key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

std::uint64_t CounterStream::bits(std::uint64_t index) const noexcept {
  const std::uint64_t block = index >> 1;
  const Philox4x32::Counter ctr = {
      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  const auto out = Philox4x32::generate(ctr, key_);
  const std::size_t w = (index & 1u) * 2;
  return (static_cast<std::uint64_t>(out[w]) << 32) | out[w + 1];
}

double CounterStream::uniform(std::uint64_t index) const noexcept {
  return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterStream::normal(std::uint64_t index) const noexcept {
  return normal_quantile(uniform(index));
}

std::uint64_t domain_seed(std::uint64_t seed, StreamDomain domain) noexcept {
  if (domain == StreamDomain::kBrownian) {
    return seed;
  }
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(domain)));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: p must lie in (0, 1)");
  }
  return -1.4142135623730951 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace tamed
