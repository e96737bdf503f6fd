#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "duffing/flow.hpp"

namespace duffing {

/// Time-1 map iterates of one orbit together with the clockwise winding (cycles) accumulated
/// around the origin up to each sample.
struct PoincareOrbit {
  std::vector<Eigen::Vector2d> samples;
  std::vector<double> winding;
  double rotation_estimate = 0.0;
  double max_radius = 0.0;
  bool left_ball = false;  ///< crossed radius_factor * start radius; iteration stopped there
};

struct StabilityConfig {
  IntegratorConfig integrator{1e-12, 1e-15};
  double radius_factor = 5.0;
  double escape_radius = 10.0;
  unsigned workers = 0;
};

/// Time-1 stroboscopic map of the forced equation from t = 0.
/// Throws DomainError when the trajectory leaves |x|, |y| <= escape_radius.
Eigen::Vector2d poincare_map(const Eigen::Vector2d& z, const ForcingProfile& forcing, const PotentialModel& model,
                             const IntegratorConfig& cfg, double escape_radius = 10.0);

/// One period carrying the winding as a third component.
Eigen::Vector3d poincare_step(const Eigen::Vector3d& zw, const ForcingProfile& forcing, const PotentialModel& model,
                              const IntegratorConfig& cfg, double escape_radius = 10.0);

/// Iterates the map N times from z0; stops early when the radius exceeds stop_radius.
PoincareOrbit iterate_orbit(const Eigen::Vector2d& z0, long N, const ForcingProfile& forcing,
                            const PotentialModel& model, const IntegratorConfig& cfg,
                            double stop_radius = std::numeric_limits<double>::infinity(),
                            double escape_radius = 10.0);

struct RotationEstimate {
  double rho = 0.0;
  double error = 0.0;  ///< 1/N
  double first_half = 0.0;
  double second_half = 0.0;
};

/// Average clockwise angular advance per iterate. Throws DomainError if the orbit hits the origin.
RotationEstimate rotation_number(const PoincareOrbit& orbit);

struct StabilityRow {
  double amplitude = 0.0;
  long iterations = 0;
  double max_radius = 0.0;
  double ratio = 0.0;  ///< max_radius / amplitude
  bool bounded = true;
  RotationEstimate rotation;
};

struct StabilityReport {
  double mean_forcing = 0.0;
  long N = 0;
  double radius_factor = 0.0;
  std::vector<StabilityRow> rows;
  int escapes = 0;
  bool all_bounded = true;
  bool rotation_monotone = false;
};

/// Orbits from (r, 0) for every amplitude r; requires a positive mean unless `allow_nonpositive_mean`.
StabilityReport stability_scan(const ForcingProfile& forcing, const PotentialModel& model,
                               const std::vector<double>& amplitudes, long N, const StabilityConfig& cfg,
                               bool allow_nonpositive_mean = false);

struct Subharmonic {
  int p = 0;
  int q = 0;
  Eigen::Vector2d z = Eigen::Vector2d::Zero();
  double residual = 0.0;
  double rotation = 0.0;  ///< winding of the q-th iterate divided by q
  double min_divisor_gap = 0.0;  ///< min over proper divisors d of |P^d z - z|
  int newton_iterations = 0;
  bool found = false;
  std::string diagnostics;
  std::vector<Eigen::Vector2d> orbit;
};

/// Smallest-denominator fraction p/q (q >= 1) strictly inside (lo, hi).
std::pair<int, int> lowest_order_rational(double lo, double hi, int max_q = 1000);

/// Locates a period-q point with winding p over q iterates, searching amplitudes in [r_lo, r_hi]
/// (rotation must bracket p/q there). Not-found is reported, not thrown.
Subharmonic find_subharmonic(const ForcingProfile& forcing, const PotentialModel& model, int p, int q, double r_lo,
                             double r_hi, const StabilityConfig& cfg, double tolerance = 1e-10);

/// Picks the smallest-denominator p/q strictly inside the rotation range of `scan`, brackets it between
/// neighbouring amplitudes and runs find_subharmonic. Returns not-found when nothing is bracketed.
Subharmonic find_lowest_subharmonic(const ForcingProfile& forcing, const PotentialModel& model,
                                    const StabilityReport& scan, const StabilityConfig& cfg,
                                    double tolerance = 1e-10);

/// Forward N periods then backward N periods; returns the distance to the start.
double reversibility_error(const Eigen::Vector2d& z0, long N, const ForcingProfile& forcing,
                           const PotentialModel& model, const IntegratorConfig& cfg);

}  // namespace duffing
