#include "duffing/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "duffing/parallel.hpp"

namespace duffing {

QuarterSample sample_cycle(const ActionAngleChart& chart, double sigma, double I0, double eta,
                           const IntegratorConfig& cfg) {
  QuarterSample s;
  s.I0 = I0;
  ForcingProfile profile;
  const FlowPoint start = make_flow_point(chart, 0.0, 0.0, I0);
  FlowPoint end;
  const CycleRecord rec = build_cycle(start, 0, sigma, eta, chart, cfg, profile, end);
  for (int q = 0; q < 4; ++q) {
    s.durations[q] = rec.t[q + 1] - rec.t[q];
    s.increments[q] = std::abs(rec.I[q + 1] - rec.I[q]);
  }
  s.cycle_time = rec.t[4];
  s.gain = rec.gain();
  // The first quarter runs under p == 1, so the sixteenth angles only need the unmodified profile.
  const ForcingProfile one;
  const FlowPoint a = advance_to_angle(start, 1.0 / 16.0, one, chart, cfg);
  const FlowPoint b = advance_to_angle(a, 3.0 / 16.0, one, chart, cfg);
  s.sixteenth_window = b.t - a.t;
  return s;
}

QuarterLemmaReport verify_quarter_lemmas(const ActionAngleChart& chart, double sigma,
                                         const std::vector<double>& I0_grid, const IntegratorConfig& cfg,
                                         double eta, LemmaTolerances tol, unsigned workers) {
  if (I0_grid.size() < 4) throw ConfigError("quarter lemma grid needs at least 4 points");
  const auto [lo, hi] = std::minmax_element(I0_grid.begin(), I0_grid.end());
  if (*hi / *lo < 1e3 * (1 - 1e-9)) throw ConfigError("quarter lemma grid must span at least 3 decades");

  QuarterLemmaReport rep;
  rep.sigma = sigma;
  rep.samples.resize(I0_grid.size());
  parallel_for(I0_grid.size(), workers,
               [&](std::size_t i) { rep.samples[i] = sample_cycle(chart, sigma, I0_grid[i], eta, cfg); });

  const EquationParams& p = chart.params();
  std::vector<double> y(I0_grid.size());
  auto fit = [&](const std::string& name, double expected, double tolerance, auto get) {
    for (std::size_t i = 0; i < I0_grid.size(); ++i) y[i] = get(rep.samples[i]);
    rep.fits.push_back(fit_loglog(I0_grid, y, expected, tolerance, name));
  };
  for (int q = 0; q < 4; ++q) {
    fit("duration_q" + std::to_string(q + 1), -p.alpha, tol.exponent,
        [q](const QuarterSample& s) { return s.durations[q]; });
  }
  for (int q = 0; q < 4; ++q) {
    fit("increment_q" + std::to_string(q + 1), p.gamma, tol.exponent,
        [q](const QuarterSample& s) { return s.increments[q]; });
  }
  fit("cycle_time", -p.alpha, tol.cycle_time, [](const QuarterSample& s) { return s.cycle_time; });
  fit("cycle_gain", p.gamma, tol.exponent, [](const QuarterSample& s) { return s.gain; });
  fit("sixteenth_window", -p.alpha, tol.exponent, [](const QuarterSample& s) { return s.sixteenth_window; });
  rep.passed = std::all_of(rep.fits.begin(), rep.fits.end(),
                           [&](const ScalingFit& f) { return f.passed(tol.min_r_squared); });
  return rep;
}

PrefactorReport compare_loss_prefactor(const ActionAngleChart& chart, double sigma, double I0,
                                       const IntegratorConfig& cfg, double eta, double tolerance) {
  PrefactorReport rep;
  rep.I0 = I0;
  rep.sigma = sigma;
  auto loss = [&](double s, double* gain) {
    ForcingProfile profile;
    FlowPoint end;
    const CycleRecord rec = build_cycle(make_flow_point(chart, 0.0, 0.0, I0), 0, s, eta, chart, cfg, profile, end);
    if (gain) *gain = rec.I[1] - rec.I[0];
    return rec.I[1] - rec.I[2];
  };
  rep.loss_full = loss(sigma, &rep.gain_full);
  rep.loss_half = loss(0.5 * sigma, nullptr);
  rep.observed_ratio = rep.loss_half / rep.loss_full;
  rep.expected_ratio = (1.0 - 0.5 * sigma) / (1.0 - sigma);
  rep.relative_error = std::abs(rep.observed_ratio / rep.expected_ratio - 1.0);
  rep.passed = rep.loss_full > 0.0 && rep.loss_half > 0.0 && rep.relative_error <= tolerance;
  return rep;
}

StageReport verify_stage_growth(const ConstructionLog& log, const ScheduleParams& schedule,
                                const EquationParams& params) {
  StageReport rep;
  rep.l = params.l;
  const int K = log.completed_stages();
  if (K < 1) {
    rep.notes.push_back("no completed stage: nothing to evaluate");
    return rep;
  }
  rep.growth_evaluable = K >= 2;
  rep.floor_evaluable = K >= 2;
  if (K < 2) rep.notes.push_back("single stage: growth (a) and floor (c) not evaluable");

  const double I0 = log.stages.front().I;
  const double tt = schedule.tau * schedule.tau_prime;
  rep.c_growth = std::numeric_limits<double>::infinity();
  rep.c_floor = std::numeric_limits<double>::infinity();
  rep.c_time = 0.0;
  std::vector<double> ks, lls;
  for (int k = 1; k <= K; ++k) {
    const StageRecord& prev = log.stages[static_cast<std::size_t>(k - 1)];
    const StageRecord& cur = log.stages[static_cast<std::size_t>(k)];
    StageRow row;
    row.k = k;
    row.I = cur.I;
    row.T = cur.T;
    row.dT = cur.T - prev.T;
    // Logs keep the ratios representable where I^beta or I0^{l^k} would overflow.
    row.growth_ratio = std::exp(std::log(cur.I) + k * std::log(tt) - params.beta * std::log(prev.I));
    row.time_ratio = row.dT * std::pow(schedule.tau_prime, k);
    row.floor_ratio = std::exp(std::log(cur.I) - std::pow(params.l, k) * std::log(I0));
    row.loglog = std::log(std::log(cur.I) / std::log(I0));
    rep.c_growth = std::min(rep.c_growth, row.growth_ratio);
    rep.c_floor = std::min(rep.c_floor, row.floor_ratio);
    rep.c_time = std::max(rep.c_time, row.time_ratio);
    ks.push_back(k);
    lls.push_back(row.loglog);
    rep.rows.push_back(row);
  }
  if (ks.size() >= 2) {
    double intercept = 0.0, r2 = 0.0, se = 0.0;
    fit_line(Eigen::Map<const Eigen::ArrayXd>(ks.data(), static_cast<Eigen::Index>(ks.size())),
             Eigen::Map<const Eigen::ArrayXd>(lls.data(), static_cast<Eigen::Index>(lls.size())), rep.loglog_slope,
             intercept, r2, se);
  }
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  rep.passed = positive(rep.c_time) && (!rep.growth_evaluable || positive(rep.c_growth)) &&
               (!rep.floor_evaluable || positive(rep.c_floor)) && rep.growth_evaluable;
  if (!positive(rep.c_time)) rep.notes.push_back("time constant c' is not positive");
  return rep;
}

BlowupEstimate estimate_blowup_time(const ConstructionLog& log, const ScheduleParams& schedule,
                                    const StageReport& stages) {
  BlowupEstimate est;
  const int K = log.completed_stages();
  if (K < 1) {
    est.message = "no completed stage";
    return est;
  }
  est.T_last = log.stages.back().T;
  const double r = 1.0 / schedule.tau_prime;
  if (K < 2) {
    est.infinite_tail = true;
    est.T_inf = est.T_last;
  } else {
    const double dT = log.stages.back().T - log.stages[log.stages.size() - 2].T;
    est.T_inf = est.T_last + dT * r / (1.0 - r);
  }
  est.bound = stages.c_time / (schedule.tau_prime - 1.0);

  est.min_action_ratio = std::numeric_limits<double>::infinity();
  for (const auto& c : log.cycles) {
    const double I_stage = log.stages[static_cast<std::size_t>(c.stage - 1)].I;
    est.min_action_ratio = std::min({est.min_action_ratio, c.I[0] / I_stage, c.I[4] / I_stage});
  }

  std::ostringstream os;
  est.passed = !est.infinite_tail && est.T_inf < 1.0 && est.bound < 1.0;
  if (est.bound >= 1.0)
    os << "bound c'/(tau'-1) = " << est.bound << " >= 1: schedule too slow, increase tau' or I_0";
  else if (est.infinite_tail)
    os << "single stage: tail not extrapolated";
  else
    os << "T_inf ~ " << est.T_inf << ", bound " << est.bound;
  est.message = os.str();
  return est;
}

}  // namespace duffing
