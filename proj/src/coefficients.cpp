#include "tamed/coefficients.hpp"

#include <algorithm>

namespace tamed {

double t_tilde(double a, double b, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw DomainError("t_tilde: epsilon must be > 0");
  }
  return std::min(1.0 / epsilon, a * a + b * b);
}

}  // namespace tamed
