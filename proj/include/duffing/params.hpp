#pragma once

namespace duffing {

/// Degree indices of x'' + a(x) x^{2n+1} + p(t) x^{2m+1} = 0 and the exponents derived from them.
///
/// Valid only when n >= 3 and n + 2 <= 2m + 1 < 2n + 1; the factory rejects anything else
/// with ConfigError.
struct EquationParams {
  int n = 3;
  int m = 2;

  double alpha = 0.0;  ///< n/(n+2): growth of the unforced frequency h'(I)
  double beta = 0.0;   ///< (2m+2)/(n+2): action-rate exponent
  double gamma = 0.0;  ///< (2m+2-n)/(n+2): per-cycle gain exponent
  double delta = 0.0;  ///< (2m+1-n)/(n+2): angle-perturbation exponent
  double l = 0.0;      ///< (2m+1)/(n+2) + 1/(2(n+2)): stage growth base

  static EquationParams make(int n, int m);

  int potential_power() const { return 2 * n + 1; }
  int forcing_power() const { return 2 * m + 1; }
  /// Exponent of x in the chart scaling x = I^{1/(n+2)} x1.
  double chart_scale() const { return 1.0 / (n + 2); }
};

/// Integer power by repeated squaring; exact for the small exponents used here.
inline double ipow(double x, int k) {
  double result = 1.0;
  double base = x;
  while (k > 0) {
    if (k & 1) result *= base;
    base *= base;
    k >>= 1;
  }
  return result;
}

}  // namespace duffing
