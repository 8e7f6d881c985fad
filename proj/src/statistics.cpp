#include "tamed/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tamed/errors.hpp"
#include "tamed/random.hpp"

namespace tamed {

namespace {

double statistic(std::span<const double> rows, std::size_t cols, std::span<const std::uint32_t> counts,
                 std::size_t m, double order, std::vector<double>& scratch) {
  scratch.assign(cols, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const std::uint32_t c = counts.empty() ? 1u : counts[r];
    if (c == 0) continue;
    const double* row = rows.data() + r * cols;
    for (std::size_t j = 0; j < cols; ++j) scratch[j] += c * row[j];
  }
  const double best = *std::max_element(scratch.begin(), scratch.end()) / static_cast<double>(m);
  return std::pow(best, 1.0 / order);
}

double percentile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

}  // namespace

double bootstrap_log2_halfwidth(std::span<const double> rows, std::size_t cols, double order, int resamples,
                                std::uint64_t seed) {
  if (cols == 0 || rows.size() % cols != 0) {
    throw UsageError("bootstrap_log2_halfwidth: row data does not match column count");
  }
  if (resamples < 2) throw UsageError("bootstrap_log2_halfwidth: need at least two resamples");
  const std::size_t m = rows.size() / cols;
  if (m == 0) return 0.0;
  std::vector<double> scratch;
  if (!(statistic(rows, cols, {}, m, order, scratch) > 0.0)) return 0.0;

  const CounterStream stream(domain_seed(seed, StreamDomain::kBootstrap), 0);
  std::vector<std::uint32_t> counts(m);
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    std::fill(counts.begin(), counts.end(), 0u);
    for (std::size_t r = 0; r < m; ++r) {
      const std::uint64_t index = static_cast<std::uint64_t>(b) * m + r;
      auto pick = static_cast<std::size_t>(stream.uniform(index) * static_cast<double>(m));
      ++counts[std::min(pick, m - 1)];
    }
    const double s = statistic(rows, cols, counts, m, order, scratch);
    if (s > 0.0) logs.push_back(std::log2(s));
  }
  if (logs.size() < 2) return 0.0;
  return 0.5 * (percentile(logs, 0.975) - percentile(logs, 0.025));
}

double normal_halfwidth(double sum, double sum_sq, double count) {
  if (count < 2.0) return 0.0;
  const double mean = sum / count;
  const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
  return 1.96 * std::sqrt(var / count);
}

double median(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace tamed
