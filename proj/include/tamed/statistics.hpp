#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace tamed {

inline constexpr int kBootstrapResamples = 200;

// Row-major sample matrix (rows = Monte Carlo samples, cols = nodes).
// The statistic is (max over columns of the column mean)^(1/order); the
// returned value is the half-width of the 95% percentile interval of its
// log2 over `resamples` multinomial resamples. Zero if the statistic
// vanishes on the full sample.
double bootstrap_log2_halfwidth(std::span<const double> rows, std::size_t cols, double order,
                                int resamples, std::uint64_t seed);

// 1.96 * sample standard deviation / sqrt(count); zero for count < 2.
double normal_halfwidth(double sum, double sum_sq, double count);

// x^a with exact shortcuts for the common orders.
inline double power_abs(double x, double a);

double median(std::span<const double> values);

}  // namespace tamed

#include <cmath>

inline double tamed::power_abs(double x, double a) {
  x = std::fabs(x);
  if (a == 1.0) return x;
  if (a == 2.0) return x * x;
  if (a == 0.5) return std::sqrt(x);
  return std::pow(x, a);
}
