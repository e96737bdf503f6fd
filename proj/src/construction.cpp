#include "duffing/construction.hpp"

#include <cmath>
#include <sstream>

namespace duffing {

namespace {

constexpr double kAnchorTol = 1e-12;
constexpr int kAnchorIterations = 20;

/// Installs the dip for a loss quarter starting at `from` and returns the crossing that closes it.
/// The up-ramp end T is solved so that it coincides with the crossing time.
FlowPoint loss_quarter(const FlowPoint& from, double sigma, double w, const ActionAngleChart& chart,
                       const IntegratorConfig& cfg, ForcingProfile& profile, int& iterations, double& anchor) {
  const double tq = from.t;
  const double low = 1.0 - sigma;
  const double down_end = tq + w;
  if (down_end >= 1.0) throw InfeasibleError("loss-quarter ramp runs past the end of the period");
  const Segment down{tq, down_end, SegmentKind::linear, 1.0, low};

  auto crossing_for = [&](double T) {
    if (T - w < down_end) {
      std::ostringstream os;
      os << "up-ramp ending at " << T << " overlaps the down-ramp ending at " << down_end;
      throw InfeasibleError(os.str());
    }
    profile.replace_tail(tq, {down, Segment{down_end, T - w, SegmentKind::constant, low, low},
                              Segment{T - w, T, SegmentKind::linear, low, 1.0}});
    return advance_to_quarter(from, profile, chart, cfg, 1.0);
  };

  // Plateau held to the end of the period gives the first anchor estimate.
  profile.replace_tail(tq, {down, Segment{down_end, 1.0, SegmentKind::constant, low, low}});
  FlowPoint cross = advance_to_quarter(from, profile, chart, cfg, 1.0);
  if (cross.t < down_end) throw InfeasibleError("quarter ended inside the down-ramp");
  double T = cross.t;
  for (iterations = 1; iterations <= kAnchorIterations; ++iterations) {
    cross = crossing_for(T);
    const double next = cross.t;
    if (std::abs(next - T) <= kAnchorTol) {
      anchor = T;
      return cross;
    }
    T = next;
  }

  // Fallback: bisection on T - crossing(T), which is positive for late anchors.
  double lo = down_end + w, hi = std::min(1.0, T + 10.0 * w);
  double f_lo = lo - crossing_for(lo).t;
  double f_hi = hi - crossing_for(hi).t;
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "up-ramp anchor did not converge near t = " << T << " and could not be bracketed (residuals " << f_lo
       << ", " << f_hi << ")";
    throw NumericalError(os.str());
  }
  while (hi - lo > kAnchorTol) {
    ++iterations;
    const double mid = 0.5 * (lo + hi);
    const double f = mid - crossing_for(mid).t;
    (f < 0.0 ? lo : hi) = mid;
  }
  anchor = hi;
  return crossing_for(hi);
}

}  // namespace

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::stage_limit: return "stage_limit";
    case StopReason::escaped: return "escaped";
    case StopReason::schedule_exhausted: return "schedule_exhausted";
    case StopReason::cycle_limit: return "cycle_limit";
  }
  return "unknown";
}

void ScheduleParams::validate(const EquationParams& params) const {
  if (!(tau >= 2.0)) throw ConfigError("tau must be at least 2");
  if (!(tau_prime > 1.0)) throw ConfigError("tau_prime must exceed 1");
  if (!(eta > params.alpha)) {
    std::ostringstream os;
    os << "eta must exceed n/(n+2) = " << params.alpha;
    throw ConfigError(os.str());
  }
  if (K_max < 1) throw ConfigError("K_max must be at least 1");
  if (!(I_0 > 0.0)) throw ConfigError("I_0 must be positive");
  if (max_cycles < 0) throw ConfigError("max_cycles must be non-negative");
  if (sigma_override && !(*sigma_override >= 0.0 && *sigma_override <= 1.0 / tau))
    throw ConfigError("sigma override must lie in [0, 1/tau]");
}

std::vector<double> ConstructionLog::stage_times() const {
  std::vector<double> out;
  for (const auto& s : stages) out.push_back(s.T);
  return out;
}

bool ConstructionLog::monotone() const {
  for (const auto& c : cycles)
    if (!(c.I[4] > c.I[0])) return false;
  for (std::size_t i = 1; i < cycles.size(); ++i)
    if (!(cycles[i].t[0] > cycles[i - 1].t[0])) return false;
  return true;
}

long stage_cycles(const EquationParams& params, const ScheduleParams& schedule, int k, double I) {
  const double count = std::floor(std::pow(schedule.tau_prime, -k) * std::pow(I, params.alpha));
  return static_cast<long>(count);
}

CycleRecord build_cycle(const FlowPoint& start, long index, double sigma, double eta, const ActionAngleChart& chart,
                        const IntegratorConfig& cfg, ForcingProfile& profile, FlowPoint& end) {
  CycleRecord rec;
  rec.i = index;
  rec.sigma = sigma;
  rec.t[0] = start.t;
  rec.I[0] = start.I;
  rec.ramp_width = std::pow(start.I, -eta);
  rec.quarter_estimate = 0.25 * chart.level_of_action(start.I).period;
  rec.margin = rec.ramp_width / rec.quarter_estimate;
  if (rec.margin >= 0.5) {
    std::ostringstream os;
    os << "ramp width " << rec.ramp_width << " is not small against the quarter duration "
       << rec.quarter_estimate << " at I = " << start.I << "; increase I_0 or eta";
    throw InfeasibleError(os.str());
  }

  FlowPoint p = advance_to_quarter(start, profile, chart, cfg, 1.0);
  rec.t[1] = p.t;
  rec.I[1] = p.I;
  for (int half = 0; half < 2; ++half) {
    if (sigma == 0.0) {
      p = advance_to_quarter(p, profile, chart, cfg, 1.0);
      rec.anchors[half] = p.t;
    } else {
      p = loss_quarter(p, sigma, rec.ramp_width, chart, cfg, profile, rec.anchor_iterations[half], rec.anchors[half]);
    }
    rec.t[2 + 2 * half] = p.t;
    rec.I[2 + 2 * half] = p.I;
    if (half == 0) {
      p = advance_to_quarter(p, profile, chart, cfg, 1.0);
      rec.t[3] = p.t;
      rec.I[3] = p.I;
    }
  }
  end = p;
  return rec;
}

Construction build_profile(const ActionAngleChart& chart, const ScheduleParams& schedule, const IntegratorConfig& cfg) {
  const EquationParams& params = chart.params();
  schedule.validate(params);
  cfg.validate();
  Construction out;
  ConstructionLog& log = out.log;
  log.stages.push_back({0, 0, 0.0, schedule.I_0, 0.0});

  const long first = stage_cycles(params, schedule, 1, schedule.I_0);
  if (first < 1) {
    std::ostringstream os;
    os << "schedule exhausted: j_1 = floor(I_0^" << params.alpha << " / tau') = 0 for I_0 = " << schedule.I_0
       << ", tau' = " << schedule.tau_prime;
    throw InfeasibleError(os.str());
  }

  FlowPoint cur = make_flow_point(chart, 0.0, 0.0, schedule.I_0);
  long j = 0;
  try {
    for (int k = 1; k <= schedule.K_max; ++k) {
      const long count = stage_cycles(params, schedule, k, cur.I);
      if (count < 1) {
        log.stop = StopReason::schedule_exhausted;
        break;
      }
      const double sigma = schedule.sigma_override ? *schedule.sigma_override : std::pow(schedule.tau, -k);
      for (long c = 0; c < count; ++c) {
        if (schedule.max_cycles > 0 && j >= schedule.max_cycles) {
          log.stop = StopReason::cycle_limit;
          break;
        }
        FlowPoint next;
        CycleRecord rec = build_cycle(cur, j, sigma, schedule.eta, chart, cfg, out.profile, next);
        rec.stage = k;
        log.cycles.push_back(rec);
        cur = next;
        cur.theta = static_cast<double>(++j);
        if (cur.escaped) {
          log.escaped = true;
          log.stop = StopReason::escaped;
          break;
        }
      }
      if (log.stop == StopReason::cycle_limit || log.escaped) {
        if (log.escaped) log.stages.push_back({k, j, cur.t, cur.I, sigma});
        break;
      }
      log.stages.push_back({k, j, cur.t, cur.I, sigma});
    }
  } catch (const Error& e) {
    throw ConstructionFailure(e, log);
  }
  return out;
}

}  // namespace duffing
