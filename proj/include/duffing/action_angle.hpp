#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "duffing/potential.hpp"
#include "duffing/regression.hpp"

namespace duffing {

/// Unwrapped angle (cycles) and action (area) of a point.
struct AngleActionState {
  double theta = 0.0;
  double I = 1.0;
};

/// Quadrature data for one level curve 1/2 y^2 + G(x) = h of the unforced system.
///
/// The quarter orbit x in [0, x_+] is parametrised by x = x_+ sin(psi), which removes the
/// inverse-square-root singularity at the turning point. `cumulative` holds
/// int_0^{psi_k} dx/sqrt(2(h - G)) at the panel boundaries `psi`.
struct EnergyLevel {
  double h = 0.0;
  double x_plus = 0.0;
  double residual = 0.0;  ///< h - G(x_plus)
  double action = 0.0;    ///< I(h)
  double period = 0.0;    ///< I'(h) = 1/h'(I)
  std::vector<double> psi;
  std::vector<double> cumulative;

  double quarter_time() const { return cumulative.back(); }
};

/// x(I, theta) and its partials at one point of the chart.
struct ChartPoint {
  double theta = 0.0;  ///< reduced to [0, 1)
  double I = 0.0;
  double h = 0.0;
  double x = 0.0;
  double y = 0.0;
  double dh_dI = 0.0;      ///< h'(I)
  double dx_dtheta = 0.0;  ///< closed form y / h'(I)
  double dx_dI = 0.0;      ///< central difference, step 1e-6 I
};

/// x1 = x I^{-1/(n+2)}, x2 = dx/dI I^{n/(n+2)}, x3 = dx/dtheta I^{-1/(n+2)}.
struct ScaledPartials {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;
};

/// Sup/inf constants of the scaled partials over a sampled (I, theta) grid.
struct ChartBounds {
  double B1 = 0.0, B2 = 0.0, B3 = 0.0;
  double C1 = 0.0, C2 = 0.0;  ///< inf of -x1 and x3 over theta in [1/16, 3/16]
  double I_lo = 0.0, I_hi = 0.0;
};

struct ChartOptions {
  double I_min = 1.0;
  double I_max = 1e13;
  int nodes_per_decade = 64;
  /// Lower end of the range where bound constants are certified.
  double certified_I_min = 1e2;
  /// When non-empty, bounds are estimated eagerly over this I grid at construction.
  std::vector<double> certify_I_grid;
};

/// Action-angle chart of x' = y, y' = -G'(x) for an even potential.
///
/// Immutable after construction; all queries are const and thread-safe.
class ActionAngleChart {
 public:
  explicit ActionAngleChart(PotentialModel model, ChartOptions options = {});

  const PotentialModel& model() const { return model_; }
  const EquationParams& params() const { return model_.params(); }
  const ChartOptions& options() const { return options_; }
  double table_I_min() const { return table_log_I_.empty() ? 0.0 : std::exp(table_log_I_.front()); }
  double table_I_max() const { return table_log_I_.empty() ? 0.0 : std::exp(table_log_I_.back()); }
  const std::optional<ChartBounds>& certified_bounds() const { return bounds_; }

  double turning_point(double h) const;
  EnergyLevel level(double h) const;
  /// Level at h(I): monotone interpolation followed by Newton polish.
  EnergyLevel level_of_action(double I) const;

  double action_of_energy(double h) const { return level(h).action; }
  double energy_of_action(double I) const { return level_of_action(I).h; }
  double frequency(double I) const { return 1.0 / level_of_action(I).period; }

  /// (x, y) on a level for a reduced angle theta in [0, 1).
  std::pair<double, double> point_on_level(const EnergyLevel& level, double theta) const;
  /// Reduced angle of (x, y) on the given level.
  double angle_on_level(const EnergyLevel& level, double x, double y) const;
  /// h - G(x) without cancellation near the turning points.
  double energy_gap(const EnergyLevel& level, double x) const;

  ChartPoint evaluate(double theta, double I, bool with_dI = true) const;
  std::pair<double, double> state_from_angle_action(double theta, double I) const;
  AngleActionState angle_action_from_state(double x, double y) const;
  ScaledPartials scaled_partials(double theta, double I) const;
  ScaledPartials scale(const ChartPoint& point) const;

  ChartBounds estimate_bounds(const std::vector<double>& I_grid, const std::vector<double>& theta_grid) const;

 private:
  double quarter_integral(const EnergyLevel& level, double psi) const;
  double solve_quarter(const EnergyLevel& level, double target) const;
  double interpolate_log_h(double log_I) const;

  PotentialModel model_;
  ChartOptions options_;
  std::vector<double> table_log_I_;
  std::vector<double> table_log_h_;
  std::vector<double> table_slopes_;
  std::optional<ChartBounds> bounds_;
};

std::pair<double, double> turning_points(const ActionAngleChart& chart, double h);
double action_of_energy(const ActionAngleChart& chart, double h);
double energy_of_action(const ActionAngleChart& chart, double I);
std::pair<double, double> state_from_angle_action(const ActionAngleChart& chart, double theta, double I);
AngleActionState angle_action_from_state(const ActionAngleChart& chart, double x, double y);
ScaledPartials scaled_partials(const ActionAngleChart& chart, double theta, double I);
ChartBounds estimate_bounds(const ActionAngleChart& chart, const std::vector<double>& I_grid,
                            const std::vector<double>& theta_grid);

/// Regression slopes of I(h), I'(h), h(I), h'(I) and the |I''(h)| envelope over an h grid.
struct LemmaReport {
  struct Row {
    double h, I, dIdh, d2Idh2, dhdI;
  };
  std::vector<Row> rows;
  ScalingFit action;         ///< I(h) ~ h^{1/2 + 1/(2n+2)}
  ScalingFit action_rate;    ///< I'(h) ~ h^{-1/2 + 1/(2n+2)}
  ScalingFit energy;         ///< h(I) ~ I^{(2n+2)/(n+2)}
  ScalingFit frequency;      ///< h'(I) ~ I^{n/(n+2)}
  ScalingFit curvature;      ///< |I''(h)| slope, must not exceed -3/2 + 1/(n+1)
  double curvature_bound_exponent = 0.0;
  double curvature_constant = 0.0;  ///< max |I''| h^{3/2 - 1/(n+1)}
  bool passed = false;
};

/// Computes the report without judging it beyond filling `passed`.
LemmaReport compute_chart_lemmas(const ActionAngleChart& chart, const std::vector<double>& h_grid,
                                 double tolerance = 0.02);
/// As compute_chart_lemmas, but throws InvariantViolation when any check fails.
LemmaReport verify_chart_lemmas(const ActionAngleChart& chart, const std::vector<double>& h_grid,
                                double tolerance = 0.02);

}  // namespace duffing
