#include "duffing/params.hpp"

#include <string>

#include "duffing/errors.hpp"

namespace duffing {

EquationParams EquationParams::make(int n, int m) {
  if (n < 3) throw ConfigError("n must be >= 3, got " + std::to_string(n));
  if (!(n + 2 <= 2 * m + 1 && 2 * m + 1 < 2 * n + 1)) {
    throw ConfigError("degree constraint n+2 <= 2m+1 < 2n+1 violated for n=" + std::to_string(n) +
                      ", m=" + std::to_string(m));
  }
  EquationParams p;
  p.n = n;
  p.m = m;
  const double d = n + 2.0;
  p.alpha = n / d;
  p.beta = (2.0 * m + 2.0) / d;
  p.gamma = (2.0 * m + 2.0 - n) / d;
  p.delta = (2.0 * m + 1.0 - n) / d;
  p.l = (2.0 * m + 1.0) / d + 1.0 / (2.0 * d);
  return p;
}

}  // namespace duffing
