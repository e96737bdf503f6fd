#pragma once

#include <array>
#include <string>
#include <vector>

#include "duffing/params.hpp"

namespace duffing {

/// Positive even periodic coefficient a(x) = c_0 + sum_j c_j cos(2 pi j x / P) together with the
/// potential G(x) = int_0^x a(s) s^{2n+1} ds and its first two derivatives.
///
/// G is evaluated from a cumulative table of one-period Gauss-Legendre panels built at
/// construction, plus one partial panel per query. The model is immutable afterwards.
class PotentialModel {
 public:
  PotentialModel(EquationParams params, std::vector<double> cos_coeffs, double period = 1.0,
                 double table_extent = 1024.0);

  /// a(x) = 3/2 + cos(2 pi x) with period 1: the reference coefficient used throughout.
  static PotentialModel reference(const EquationParams& params);
  /// a(x) = 1: pure power potential G = x^{2n+2}/(2n+2).
  static PotentialModel power_law(const EquationParams& params);

  const EquationParams& params() const { return params_; }
  const std::vector<double>& cos_coeffs() const { return coeffs_; }
  double period() const { return period_; }
  bool is_constant() const { return coeffs_.size() == 1; }

  /// Certified bounds a_min = c_0 - sum|c_j| and a_max = c_0 + sum|c_j|.
  double a_min() const { return a_min_; }
  double a_max() const { return a_max_; }

  double a(double x) const;
  double a_prime(double x) const;
  double G(double x) const;
  double G1(double x) const;
  double G2(double x) const;

  /// int_lo^hi a(s) s^{2n+1} ds for 0 <= lo <= hi, without cancellation when hi - lo is short.
  double G_between(double lo, double hi) const;

  /// Panel width of the quadrature grid in x: one period of the highest harmonic.
  double panel_width() const { return panel_; }

 private:
  double integrate_panel(double lo, double hi) const;

  EquationParams params_;
  std::vector<double> coeffs_;
  std::vector<double> omegas_;
  double period_;
  double a_min_ = 0.0;
  double a_max_ = 0.0;
  double panel_ = 1.0;
  std::vector<double> cumulative_;
};

double eval_a(const PotentialModel& model, double x);
double eval_G(const PotentialModel& model, double x);
double eval_G1(const PotentialModel& model, double x);
double eval_G2(const PotentialModel& model, double x);

/// Empirical constants of one growth inequality over a sample: ratio in [c_low, c_high].
struct RatioBounds {
  std::string name;
  double c_low = 0.0;
  double c_high = 0.0;
  bool two_sided = false;
};

/// The five growth inequalities for G, G', G'' and their quotients, in the order
/// G/|x|^{2n+2}, |G'|/|x|^{2n+1}, |G''|/(|x|^{2n+1}+x^{2n}), |G/G'|/|x|, |G G''/G'^2|/(|x|+1).
struct BoundReport {
  std::array<RatioBounds, 5> ratios;
  std::size_t samples = 0;
};

/// Samples x log-spaced in [x_lo, x_hi] (both signs). Requires x_lo >= 1. Throws
/// InvariantViolation naming the inequality when a ratio is non-finite, or non-positive where
/// the inequality is two-sided.
BoundReport check_growth_bounds(const PotentialModel& model, double x_lo, double x_hi,
                                std::size_t sample_count);

}  // namespace duffing
