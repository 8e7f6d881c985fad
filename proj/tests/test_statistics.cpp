#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tamed/parallel.hpp"
#include "tamed/statistics.hpp"

using namespace tamed;

TEST_CASE("ordered_reduce is independent of the worker count") {
  auto work = [](std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += 1.0 / (1.0 + static_cast<double>(i) * 0.37);
    return std::vector<double>{s};
  };
  auto merge = [](std::vector<double>& t, std::vector<double>&& p) { t.insert(t.end(), p.begin(), p.end()); };
  const auto one = ordered_reduce(10007, 1, std::vector<double>{}, work, merge);
  for (unsigned w : {2u, 3u, 4u, 8u}) CHECK(ordered_reduce(10007, w, std::vector<double>{}, work, merge) == one);
  CHECK(one.size() == (10007 + kChunkSamples - 1) / kChunkSamples);
  CHECK(ordered_reduce(0, 4, 5, [](std::size_t, std::size_t) { return 1; }, [](int& a, int&& b) { a += b; }) == 5);
}

TEST_CASE("ordered_reduce propagates exceptions") {
  auto work = [](std::size_t b, std::size_t) -> int {
    if (b >= 64) throw std::runtime_error("boom");
    return 1;
  };
  CHECK_THROWS_AS(ordered_reduce(1000, 4, 0, work, [](int& a, int&& b) { a += b; }), std::runtime_error);
}

TEST_CASE("normal half-width and median") {
  CHECK(normal_halfwidth(0.0, 0.0, 1.0) == 0.0);
  // values 1, 3: sd = sqrt(2)
  CHECK(normal_halfwidth(4.0, 10.0, 2.0) == doctest::Approx(1.96 * std::sqrt(2.0) / std::sqrt(2.0)));
  const std::vector<double> v{5.0, 1.0, 3.0};
  CHECK(median(v) == 3.0);
  const std::vector<double> w{4.0, 1.0, 3.0, 2.0};
  CHECK(median(w) == 2.5);
  CHECK(power_abs(-3.0, 2.0) == 9.0);
  CHECK(power_abs(-4.0, 0.5) == 2.0);
  CHECK(power_abs(2.0, 3.0) == doctest::Approx(8.0));
}

TEST_CASE("bootstrap half-width") {
  const std::vector<double> zero(100, 0.0);
  CHECK(bootstrap_log2_halfwidth(zero, 1, 1.0, 200, 1) == 0.0);
  const std::vector<double> constant(100, 2.0);
  CHECK(bootstrap_log2_halfwidth(constant, 1, 1.0, 200, 1) == 0.0);
  std::vector<double> rows;
  for (int i = 0; i < 2000; ++i) rows.push_back(1.0 + (i % 10));
  const double hw = bootstrap_log2_halfwidth(rows, 1, 1.0, 200, 3);
  // mean 5.5, sd 2.87, se 0.064: log2 half-width ~ 1.96 * 0.064 / (5.5 ln 2)
  CHECK(hw == doctest::Approx(1.96 * 2.8723 / std::sqrt(2000.0) / (5.5 * std::log(2.0))).epsilon(0.25));
  CHECK(bootstrap_log2_halfwidth(rows, 1, 1.0, 200, 3) == hw);
  CHECK(bootstrap_log2_halfwidth(rows, 2, 1.0, 200, 3) > 0.0);
}
