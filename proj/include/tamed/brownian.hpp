#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tamed {

// Uniform partition of [0, T] into N = base * 2^level steps.
class TimeGrid {
 public:
  TimeGrid(double horizon, int level, std::int64_t base = 1);

  // Grid with step exactly T / round(T / h); rejects h that does not divide T.
  static TimeGrid from_step(double horizon, double h);

  double horizon() const noexcept { return horizon_; }
  int level() const noexcept { return level_; }
  std::int64_t base() const noexcept { return base_; }
  std::int64_t steps() const noexcept { return base_ << level_; }
  double h() const noexcept { return horizon_ / static_cast<double>(steps()); }
  double time(std::int64_t n) const noexcept { return static_cast<double>(n) * h(); }

  // Grid with the step multiplied by 2^k; requires k <= level.
  TimeGrid coarsened(int k) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  int level_;
  std::int64_t base_;
};

// Brownian increments on a grid for one Monte Carlo sample.
class BrownianPath {
 public:
  BrownianPath(TimeGrid grid, std::vector<double> increments, std::uint64_t seed,
               std::uint64_t sample_index);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const double> increments() const noexcept { return increments_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t sample_index() const noexcept { return sample_index_; }

  // W(T) accumulated left to right.
  double endpoint() const noexcept;

 private:
  TimeGrid grid_;
  std::vector<double> increments_;
  std::uint64_t seed_;
  std::uint64_t sample_index_;
};

// N i.i.d. N(0, h) increments keyed by (seed, sample_index, increment index).
BrownianPath sample_path(std::uint64_t seed, std::uint64_t sample_index, const TimeGrid& grid);

// Block sums over `factor` consecutive increments, evaluated as repeated
// pairwise halving so that coarsen(coarsen(p, a), b) == coarsen(p, a * b)
// bit for bit. factor must be a power of two dividing N.
BrownianPath coarsen(const BrownianPath& path, std::int64_t factor);

// Binary replay format: 32-byte little-endian header
//   bytes 0-3  magic "WTBP"
//   bytes 4-7  N (uint32)
//   bytes 8-15 T (float64)
//   bytes 16-23 seed (uint64)
//   bytes 24-31 sample_index (uint64)
// followed by N float64 increments.
void write_path(const BrownianPath& path, const std::filesystem::path& file);
BrownianPath read_path(const std::filesystem::path& file);

std::vector<unsigned char> encode_path(const BrownianPath& path);
BrownianPath decode_path(std::span<const unsigned char> bytes);

}  // namespace tamed
