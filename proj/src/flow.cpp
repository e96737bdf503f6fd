#include "duffing/flow.hpp"

#include <sstream>

namespace duffing {

namespace {

using Stepper2 = DormandPrince<double, 2>;
using Vec2 = Stepper2::Vector;

double wrap_unit(double v) { return v - std::floor(v); }

/// Index of the quarter (1..4, cyclic) that ends at the multiple `target` of 1/4.
int quarter_kind(double target) {
  const long q = std::lround(4.0 * target);
  return static_cast<int>(((q % 4) + 4) % 4);
}

/// Coordinate whose rising zero marks arrival at the quarter angle of the given kind.
double quarter_coordinate(int kind, double x, double y) {
  switch (kind) {
    case 1: return x;   // theta = 1/4: x = 0, y > 0
    case 2: return -y;  // theta = 1/2: y = 0, x > 0
    case 3: return -x;  // theta = 3/4: x = 0, y < 0
    default: return y;  // theta = 0 mod 1: y = 0, x < 0
  }
}

double next_quarter(double theta) {
  const double q = std::round(4.0 * theta);
  if (std::abs(4.0 * theta - q) < 1e-9) return (q + 1.0) / 4.0;
  return std::ceil(4.0 * theta) / 4.0;
}

FlowPoint finish_phase(const ActionAngleChart& chart, double t, const Vec2& z, double theta,
                       const IntegratorConfig& cfg) {
  FlowPoint out;
  out.t = t;
  out.x = z[0];
  out.y = z[1];
  out.theta = theta;
  out.I = chart.action_of_energy(0.5 * z[1] * z[1] + chart.model().G(z[0]));
  out.escaped = out.I >= cfg.I_cap;
  return out;
}

[[noreturn]] void not_reached(double target, double t_limit) {
  std::ostringstream os;
  os << "angle " << target << " not reached before t = " << t_limit;
  throw InfeasibleError(os.str());
}

/// Event-driven phase-plane integration until g(z) rises through zero.
template <typename G>
bool phase_until(Vec2& z, double& t, double t_limit, G&& g, const ForcingProfile& forcing,
                 const PotentialModel& model, const IntegratorConfig& cfg) {
  Stepper2 dp(cfg.control());
  bool hit = false;
  for_each_piece(forcing, t, t_limit, [&](double a, double b, const ForcingPiece& piece) {
    auto rhs = [&](double tt, const Vec2& s) -> Vec2 { return phase_rhs(model, piece, tt, s); };
    RisingEvent ev{[&](double, const Vec2& s) { return g(s); }};
    auto r = dp.integrate(rhs, a, z, b, ev);
    z = r.y;
    t = r.t;
    hit = r.event;
    return !hit;
  });
  return hit;
}

Vec2 angle_action_rhs(const ActionAngleChart& chart, const ForcingPiece& piece, double t, const Vec2& s) {
  if (!(s[1] > 0.0)) throw DomainError("action left the chart");
  const ChartPoint cp = chart.evaluate(s[0], s[1], true);
  const double p = piece(t);
  const double xp = ipow(cp.x, chart.params().forcing_power());
  return {cp.dh_dI + p * xp * cp.dx_dI, -p * xp * cp.dx_dtheta};
}

template <typename G>
bool angle_action_until(Vec2& s, double& t, double t_limit, G&& g, const ForcingProfile& forcing,
                        const ActionAngleChart& chart, const IntegratorConfig& cfg) {
  Stepper2 dp(cfg.control());
  bool hit = false;
  for_each_piece(forcing, t, t_limit, [&](double a, double b, const ForcingPiece& piece) {
    auto rhs = [&](double tt, const Vec2& v) -> Vec2 { return angle_action_rhs(chart, piece, tt, v); };
    RisingEvent ev{[&](double, const Vec2& v) { return g(v); }};
    auto r = dp.integrate(rhs, a, s, b, ev);
    s = r.y;
    t = r.t;
    hit = r.event;
    return !hit;
  });
  return hit;
}

}  // namespace

FlowBackend parse_backend(const std::string& name) {
  if (name == "phase_plane") return FlowBackend::phase_plane;
  if (name == "angle_action") return FlowBackend::angle_action;
  throw ConfigError("unknown flow backend '" + name + "' (expected phase_plane or angle_action)");
}

std::string to_string(FlowBackend backend) {
  return backend == FlowBackend::phase_plane ? "phase_plane" : "angle_action";
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("integrator tolerances must be positive");
  if (!(max_step > 0.0)) throw ConfigError("max_step must be positive");
  if (!(I_cap > 1.0)) throw ConfigError("I_cap must exceed the chart range minimum");
}

PhaseState integrate_xy(const PhaseState& state, double t_end, const ForcingProfile& forcing,
                        const PotentialModel& model, const IntegratorConfig& cfg) {
  Stepper2 dp(cfg.control());
  Vec2 z(state.x, state.y);
  for_each_piece(forcing, state.t, t_end, [&](double a, double b, const ForcingPiece& piece) {
    auto rhs = [&](double tt, const Vec2& s) -> Vec2 { return phase_rhs(model, piece, tt, s); };
    z = dp.integrate(rhs, a, z, b).y;
    return true;
  });
  return {t_end, z[0], z[1]};
}

AngleActionResult integrate_angle_action(const AngleActionState& state, double t0, double t_end,
                                         const ForcingProfile& forcing, const ActionAngleChart& chart,
                                         const IntegratorConfig& cfg) {
  Vec2 s(state.theta, state.I);
  double t = t0;
  const double cap = cfg.I_cap;
  const bool escaped = angle_action_until(
      s, t, t_end, [cap](const Vec2& v) { return v[1] - cap; }, forcing, chart, cfg);
  if (!escaped) t = t_end;
  return {t, {s[0], s[1]}, escaped};
}

FlowPoint make_flow_point(const ActionAngleChart& chart, double t, double theta, double I) {
  const auto [x, y] = chart.state_from_angle_action(theta, I);
  return {t, x, y, theta, I, false};
}

FlowPoint advance_to_quarter(const FlowPoint& start, const ForcingProfile& forcing, const ActionAngleChart& chart,
                             const IntegratorConfig& cfg, double t_limit) {
  const double target = next_quarter(start.theta);
  double t = start.t;
  if (cfg.backend == FlowBackend::phase_plane) {
    const int kind = quarter_kind(target);
    Vec2 z(start.x, start.y);
    const bool hit = phase_until(
        z, t, t_limit, [kind](const Vec2& s) { return quarter_coordinate(kind, s[0], s[1]); }, forcing,
        chart.model(), cfg);
    if (!hit) not_reached(target, t_limit);
    return finish_phase(chart, t, z, target, cfg);
  }
  Vec2 s(start.theta, start.I);
  if (!angle_action_until(s, t, t_limit, [target](const Vec2& v) { return v[0] - target; }, forcing, chart, cfg))
    not_reached(target, t_limit);
  // The dominance condition requires the angle to move forward through the crossing.
  const Vec2 rate = angle_action_rhs(chart, ForcingPiece{t, forcing(t), 0.0}, t, s);
  if (!(rate[0] > 0.0)) {
    std::ostringstream os;
    os << "angle is not increasing at the crossing t = " << t << "; start from a larger action";
    throw InfeasibleError(os.str());
  }
  FlowPoint out = make_flow_point(chart, t, target, s[1]);
  out.escaped = s[1] >= cfg.I_cap;
  return out;
}

FlowPoint advance_to_quarter(const AngleActionState& start, double t0, const ForcingProfile& forcing,
                             const ActionAngleChart& chart, const IntegratorConfig& cfg, double t_limit) {
  return advance_to_quarter(make_flow_point(chart, t0, start.theta, start.I), forcing, chart, cfg, t_limit);
}

FlowPoint advance_to_angle(const FlowPoint& start, double target, const ForcingProfile& forcing,
                           const ActionAngleChart& chart, const IntegratorConfig& cfg, double t_limit) {
  if (!(target > start.theta)) throw ConfigError("advance_to_angle: target must lie ahead of the start");
  if (target - start.theta > 0.25 + 1e-12) throw ConfigError("advance_to_angle: target beyond the next quarter");
  const double q = 4.0 * target;
  if (std::abs(q - std::round(q)) < 1e-12) {
    FlowPoint p = advance_to_quarter(start, forcing, chart, cfg, t_limit);
    return p;
  }
  double t = start.t;
  if (cfg.backend == FlowBackend::phase_plane) {
    // Chart angle measured from the start, unwrapped assuming sub-half-turn steps.
    const double base = wrap_unit(start.theta);
    const double ahead = target - start.theta;
    auto g = [&](const Vec2& s) {
      if (s[0] == 0.0 && s[1] == 0.0) return -1.0;
      const double th = chart.angle_action_from_state(s[0], s[1]).theta;
      double d = th - base;
      d -= std::floor(d + 0.25);
      return d - ahead;
    };
    Vec2 z(start.x, start.y);
    if (!phase_until(z, t, t_limit, g, forcing, chart.model(), cfg)) not_reached(target, t_limit);
    return finish_phase(chart, t, z, target, cfg);
  }
  Vec2 s(start.theta, start.I);
  if (!angle_action_until(s, t, t_limit, [&](const Vec2& v) { return v[0] - target; }, forcing, chart, cfg))
    not_reached(target, t_limit);
  FlowPoint out = make_flow_point(chart, t, target, s[1]);
  out.escaped = s[1] >= cfg.I_cap;
  return out;
}

ConsistencyReport chart_consistency(double I0, double duration, const ForcingProfile& forcing,
                                    const ActionAngleChart& chart, const IntegratorConfig& cfg, double t0,
                                    double threshold) {
  ConsistencyReport rep;
  const auto [x0, y0] = chart.state_from_angle_action(0.0, I0);
  rep.phase_plane = integrate_xy({t0, x0, y0}, t0 + duration, forcing, chart.model(), cfg);
  const AngleActionResult aa = integrate_angle_action({0.0, I0}, t0, t0 + duration, forcing, chart, cfg);
  rep.angle_action = aa.state;
  const auto [x1, y1] = chart.state_from_angle_action(aa.state.theta, aa.state.I);
  rep.through_chart = {aa.t, x1, y1};
  const double dist = std::hypot(rep.phase_plane.x - x1, rep.phase_plane.y - y1);
  rep.divergence = dist / (1.0 + std::abs(x1) + std::abs(y1));
  if (!(rep.divergence <= threshold)) {
    std::ostringstream os;
    os << "chart inconsistency: divergence " << rep.divergence << " exceeds " << threshold;
    throw InvariantViolation(os.str());
  }
  return rep;
}

std::vector<TrajectorySample> sample_trajectory(const FlowPoint& start, double t_end, double stride,
                                                const ForcingProfile& forcing, const ActionAngleChart& chart,
                                                const IntegratorConfig& cfg) {
  if (!(stride > 0.0)) throw ConfigError("trajectory stride must be positive");
  std::vector<TrajectorySample> out;
  PhaseState z{start.t, start.x, start.y};
  double theta = start.theta;
  double last_reduced = wrap_unit(theta);
  out.push_back({z.t, theta, start.I, z.x, z.y, forcing(z.t)});
  for (long k = 1;; ++k) {
    const double t = std::min(t_end, start.t + static_cast<double>(k) * stride);
    z = integrate_xy(z, t, forcing, chart.model(), cfg);
    const AngleActionState aa = chart.angle_action_from_state(z.x, z.y);
    double d = aa.theta - last_reduced;
    d -= std::floor(d);
    theta += d;
    last_reduced = aa.theta;
    out.push_back({t, theta, aa.I, z.x, z.y, forcing(t)});
    if (t >= t_end) break;
  }
  return out;
}

}  // namespace duffing
