#include "tamed/brownian.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tamed/errors.hpp"
#include "tamed/random.hpp"

namespace tamed {

namespace {

constexpr unsigned char kMagic[4] = {'W', 'T', 'B', 'P'};
constexpr std::size_t kHeaderBytes = 32;

template <class T>
void put_le(std::vector<unsigned char>& out, std::size_t offset, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint64_t raw = 0;
  std::memcpy(&raw, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out[offset + i] = static_cast<unsigned char>(raw >> (8 * i));
  }
}

template <class T>
T get_le(std::span<const unsigned char> in, std::size_t offset) {
  std::uint64_t raw = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    raw |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
  }
  T value;
  std::memcpy(&value, &raw, sizeof(T));
  return value;
}

}  // namespace

TimeGrid::TimeGrid(double horizon, int level, std::int64_t base)
    : horizon_(horizon), level_(level), base_(base) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw UsageError("TimeGrid: horizon must be positive and finite");
  }
  if (level < 0 || level > 40) {
    throw UsageError("TimeGrid: level must lie in [0, 40]");
  }
  if (base < 1 || base > (std::int64_t{1} << 40) || (base << level) > (std::int64_t{1} << 40)) {
    throw UsageError("TimeGrid: step count out of range");
  }
}

TimeGrid TimeGrid::from_step(double horizon, double h) {
  if (!(h > 0.0) || !(horizon > 0.0)) {
    throw UsageError("TimeGrid::from_step: horizon and h must be positive");
  }
  const double ratio = horizon / h;
  const auto n = static_cast<std::int64_t>(std::llround(ratio));
  if (n < 1 || std::fabs(ratio - static_cast<double>(n)) > 1e-9 * ratio) {
    throw UsageError("TimeGrid::from_step: h does not divide the horizon");
  }
  const int level = std::countr_zero(static_cast<std::uint64_t>(n));
  return TimeGrid(horizon, level, n >> level);
}

TimeGrid TimeGrid::coarsened(int k) const {
  if (k < 0 || k > level_) {
    throw UsageError("TimeGrid::coarsened: factor exceeds refinement level");
  }
  return TimeGrid(horizon_, level_ - k, base_);
}

BrownianPath::BrownianPath(TimeGrid grid, std::vector<double> increments, std::uint64_t seed,
                           std::uint64_t sample_index)
    : grid_(grid), increments_(std::move(increments)), seed_(seed), sample_index_(sample_index) {
  if (static_cast<std::int64_t>(increments_.size()) != grid_.steps()) {
    throw UsageError("BrownianPath: increment count does not match grid");
  }
}

double BrownianPath::endpoint() const noexcept {
  double w = 0.0;
  for (double dw : increments_) w += dw;
  return w;
}

BrownianPath sample_path(std::uint64_t seed, std::uint64_t sample_index, const TimeGrid& grid) {
  const CounterStream stream(domain_seed(seed, StreamDomain::kBrownian), sample_index);
  const auto n = static_cast<std::size_t>(grid.steps());
  const double scale = std::sqrt(grid.h());
  std::vector<double> inc(n);
  for (std::size_t i = 0; i < n; ++i) {
    inc[i] = scale * stream.normal(i);
  }
  return BrownianPath(grid, std::move(inc), seed, sample_index);
}

BrownianPath coarsen(const BrownianPath& path, std::int64_t factor) {
  if (factor < 1 || !std::has_single_bit(static_cast<std::uint64_t>(factor))) {
    throw UsageError("coarsen: factor must be a power of two");
  }
  const int k = std::countr_zero(static_cast<std::uint64_t>(factor));
  if (k > path.grid().level()) {
    throw UsageError("coarsen: factor does not divide the step count");
  }
  std::vector<double> inc(path.increments().begin(), path.increments().end());
  for (int pass = 0; pass < k; ++pass) {
    const std::size_t half = inc.size() / 2;
    for (std::size_t j = 0; j < half; ++j) {
      inc[j] = inc[2 * j] + inc[2 * j + 1];
    }
    inc.resize(half);
  }
  return BrownianPath(path.grid().coarsened(k), std::move(inc), path.seed(), path.sample_index());
}

std::vector<unsigned char> encode_path(const BrownianPath& path) {
  const auto n = path.increments().size();
  if (n > 0xFFFFFFFFu) {
    throw UsageError("encode_path: too many increments for the header");
  }
  std::vector<unsigned char> out(kHeaderBytes + 8 * n);
  std::memcpy(out.data(), kMagic, 4);
  put_le(out, 4, static_cast<std::uint32_t>(n));
  put_le(out, 8, path.grid().horizon());
  put_le(out, 16, path.seed());
  put_le(out, 24, path.sample_index());
  for (std::size_t i = 0; i < n; ++i) {
    put_le(out, kHeaderBytes + 8 * i, path.increments()[i]);
  }
  return out;
}

BrownianPath decode_path(std::span<const unsigned char> bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw UsageError("decode_path: missing header or bad magic");
  }
  const auto n = get_le<std::uint32_t>(bytes, 4);
  if (bytes.size() != kHeaderBytes + 8 * static_cast<std::size_t>(n) || n == 0) {
    throw UsageError("decode_path: payload size does not match header");
  }
  const auto horizon = get_le<double>(bytes, 8);
  const auto seed = get_le<std::uint64_t>(bytes, 16);
  const auto index = get_le<std::uint64_t>(bytes, 24);
  std::vector<double> inc(n);
  for (std::size_t i = 0; i < n; ++i) {
    inc[i] = get_le<double>(bytes, kHeaderBytes + 8 * i);
  }
  const int level = std::countr_zero(n);
  return BrownianPath(TimeGrid(horizon, level, static_cast<std::int64_t>(n >> level)), std::move(inc),
                      seed, index);
}

void write_path(const BrownianPath& path, const std::filesystem::path& file) {
  const auto bytes = encode_path(path);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("write_path: cannot open " + file.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

BrownianPath read_path(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("read_path: cannot open " + file.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_path(bytes);
}

}  // namespace tamed
