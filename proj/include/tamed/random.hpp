#pragma once

#include <array>
#include <cstdint>

namespace tamed {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Stateless: output is a pure function of (counter, key).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept;
};

// Random-access stream of uniforms / standard normals addressed by
// (seed, stream, index). Distinct streams never overlap.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  // Two 64-bit words per counter block; index selects block and word.
  std::uint64_t bits(std::uint64_t index) const noexcept;

  // Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform(std::uint64_t index) const noexcept;

  // Standard normal via the inverse CDF of uniform(index).
  double normal(std::uint64_t index) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  Philox4x32::Key key_;
};

// Domain tags folded into the seed so that unrelated consumers drawing from
// the same user seed never share a stream.
enum class StreamDomain : std::uint64_t {
  kBrownian = 0,
  kEnsemble = 1,
  kBootstrap = 2,
  kSweep = 3,
};

std::uint64_t domain_seed(std::uint64_t seed, StreamDomain domain) noexcept;

// Standard normal quantile, accurate to a few ulp on (0, 1).
double normal_quantile(double p);

}  // namespace tamed
