#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "duffing/action_angle.hpp"
#include "duffing/forcing.hpp"
#include "duffing/ode.hpp"

namespace duffing {

/// Which coordinates carry the forced motion between quarter crossings.
enum class FlowBackend {
  phase_plane,   ///< x' = y, y' = -G'(x) - p x^{2m+1}; quarter angles are coordinate zeros
  angle_action,  ///< theta' = h'(I) + p x^{2m+1} x_I, I' = -p x^{2m+1} x_theta through the chart
};

FlowBackend parse_backend(const std::string& name);
std::string to_string(FlowBackend backend);

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double I_cap = 1e12;
  long max_steps = 50'000'000;
  FlowBackend backend = FlowBackend::phase_plane;

  StepControl control() const { return {rel_tol, abs_tol, max_step, max_steps}; }
  void validate() const;
};

struct PhaseState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// A point of a forced trajectory carried in both coordinate systems.
struct FlowPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  ///< unwrapped
  double I = 0.0;
  bool escaped = false;  ///< I reached the configured cap
};

/// p on one smooth piece: p(t) = value + slope (t - t_ref).
struct ForcingPiece {
  double t_ref = 0.0;
  double value = 1.0;
  double slope = 0.0;
  double operator()(double t) const { return value + slope * (t - t_ref); }
};

/// Calls body(t_a, t_b, piece) for consecutive smooth pieces covering [t0, t1] (or [t1, t0]
/// walked backwards). body returns false to stop early.
template <typename Body>
void for_each_piece(const ForcingProfile& forcing, double t0, double t1, Body&& body) {
  const auto& segs = forcing.segments();
  const std::size_t last = segs.size() - 1;
  double t = t0;
  const bool forward = t1 >= t0;
  while (forward ? t < t1 : t > t1) {
    double k = std::floor(t);
    std::size_t i = forcing.locate(t - k);
    // Rounding in t - k can place t on the far side of a junction; step until the piece makes progress.
    if (forward) {
      while (k + segs[i].t1 <= t) {
        if (i == last) { i = 0; k += 1.0; } else { ++i; }
      }
    } else {
      while (k + segs[i].t0 >= t) {
        if (i == 0) { i = last; k -= 1.0; } else { --i; }
      }
    }
    const Segment& seg = segs[i];
    const double b = forward ? std::min(t1, k + seg.t1) : std::max(t1, k + seg.t0);
    if (!body(t, b, ForcingPiece{k + seg.t0, seg.v0, seg.slope()})) return;
    t = b;
  }
}

/// Phase-plane right-hand side on one forcing piece.
inline Eigen::Vector2d phase_rhs(const PotentialModel& model, const ForcingPiece& p, double t,
                                 const Eigen::Vector2d& s) {
  const int k = model.params().forcing_power();
  return {s[1], -model.G1(s[0]) - p(t) * ipow(s[0], k)};
}

/// Integrates the second-order equation from `state` to t_end (either direction),
/// restarting at every forcing breakpoint.
PhaseState integrate_xy(const PhaseState& state, double t_end, const ForcingProfile& forcing,
                        const PotentialModel& model, const IntegratorConfig& cfg);

struct AngleActionResult {
  double t = 0.0;
  AngleActionState state;
  bool escaped = false;
};

/// Integrates the angle-action system from (theta, I) at time t0 to t_end.
AngleActionResult integrate_angle_action(const AngleActionState& state, double t0, double t_end,
                                         const ForcingProfile& forcing, const ActionAngleChart& chart,
                                         const IntegratorConfig& cfg);

/// Full point at (theta, I) and time t.
FlowPoint make_flow_point(const ActionAngleChart& chart, double t, double theta, double I);

/// Advances until the unwrapped angle reaches the next multiple of 1/4 above start.theta.
/// The returned point carries theta equal to that multiple exactly.
/// Throws InfeasibleError when no crossing happens before t_limit.
FlowPoint advance_to_quarter(const FlowPoint& start, const ForcingProfile& forcing, const ActionAngleChart& chart,
                             const IntegratorConfig& cfg, double t_limit = std::numeric_limits<double>::infinity());

/// Convenience form starting from (theta, I) at time t0.
FlowPoint advance_to_quarter(const AngleActionState& start, double t0, const ForcingProfile& forcing,
                             const ActionAngleChart& chart, const IntegratorConfig& cfg,
                             double t_limit = std::numeric_limits<double>::infinity());

/// Advances to an arbitrary unwrapped angle `target` inside the quarter that contains start.theta.
FlowPoint advance_to_angle(const FlowPoint& start, double target, const ForcingProfile& forcing,
                           const ActionAngleChart& chart, const IntegratorConfig& cfg,
                           double t_limit = std::numeric_limits<double>::infinity());

struct ConsistencyReport {
  double divergence = 0.0;  ///< |z_xy - z_chart| / (1 + |x| + |y|)
  PhaseState phase_plane;
  PhaseState through_chart;
  AngleActionState angle_action;
};

/// Integrates (I0, theta = 0) at t0 for `duration` in both coordinate systems and compares
/// the endpoints in the phase plane. Throws InvariantViolation above `threshold`.
ConsistencyReport chart_consistency(double I0, double duration, const ForcingProfile& forcing,
                                    const ActionAngleChart& chart, const IntegratorConfig& cfg, double t0 = 0.0,
                                    double threshold = 1e-6);

struct TrajectorySample {
  double t, theta, I, x, y, p;
};

/// Phase-plane samples every `stride` time units from start to t_end.
std::vector<TrajectorySample> sample_trajectory(const FlowPoint& start, double t_end, double stride,
                                                const ForcingProfile& forcing, const ActionAngleChart& chart,
                                                const IntegratorConfig& cfg);

}  // namespace duffing
