#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

namespace duffing {

/// N-point Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on the Legendre recurrence.
template <typename Scalar, int N>
struct GaussLegendre {
  using Array = Eigen::Array<Scalar, N, 1>;
  Array nodes;
  Array weights;

  GaussLegendre() {
    for (int i = 0; i < (N + 1) / 2; ++i) {
      Scalar z = std::cos(std::numbers::pi_v<Scalar> * (i + Scalar(0.75)) / (N + Scalar(0.5)));
      Scalar dp = 0;
      for (int iter = 0; iter < 100; ++iter) {
        Scalar p1 = 1, p2 = 0;
        for (int j = 0; j < N; ++j) {
          const Scalar p3 = p2;
          p2 = p1;
          p1 = ((2 * j + 1) * z * p2 - j * p3) / (j + 1);
        }
        dp = N * (z * p1 - p2) / (z * z - 1);
        const Scalar dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) <= 4 * std::numeric_limits<Scalar>::epsilon()) break;
      }
      nodes(i) = -z;
      nodes(N - 1 - i) = z;
      weights(i) = weights(N - 1 - i) = 2 / ((1 - z * z) * dp * dp);
    }
  }

  static const GaussLegendre& instance() {
    static const GaussLegendre rule;
    return rule;
  }

  /// Integral of f over [a, b].
  template <typename F>
  Scalar integrate(F&& f, Scalar a, Scalar b) const {
    const Scalar mid = (a + b) / 2;
    const Scalar half = (b - a) / 2;
    Scalar sum = 0;
    for (int i = 0; i < N; ++i) sum += weights(i) * f(mid + half * nodes(i));
    return sum * half;
  }
};

using GL16 = GaussLegendre<double, 16>;

}  // namespace duffing
