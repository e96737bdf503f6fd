#pragma once

#include <array>
#include <string>
#include <vector>

#include "duffing/construction.hpp"
#include "duffing/regression.hpp"

namespace duffing {

/// Quarter times and increments of one isolated cycle started at (I0, theta = 0), t = 0.
struct QuarterSample {
  double I0 = 0.0;
  std::array<double, 4> durations{};
  std::array<double, 4> increments{};  ///< |I_{(q+1)/4} - I_{q/4}|
  double cycle_time = 0.0;             ///< t_1
  double gain = 0.0;                   ///< I_1 - I_0
  double sixteenth_window = 0.0;       ///< t_{3/16} - t_{1/16}
};

struct QuarterLemmaReport {
  double sigma = 0.0;
  std::vector<QuarterSample> samples;
  /// duration_q1..q4, increment_q1..q4, cycle_time, cycle_gain, sixteenth_window.
  std::vector<ScalingFit> fits;
  bool passed = false;
};

struct LemmaTolerances {
  double exponent = 0.05;
  double cycle_time = 0.03;
  double min_r_squared = 0.99;
};

QuarterSample sample_cycle(const ActionAngleChart& chart, double sigma, double I0, double eta,
                           const IntegratorConfig& cfg);

/// Fits quarter durations and increments against I0 over a log-spaced grid (>= 4 points,
/// >= 3 decades). Failures are reported, not thrown.
QuarterLemmaReport verify_quarter_lemmas(const ActionAngleChart& chart, double sigma,
                                         const std::vector<double>& I0_grid, const IntegratorConfig& cfg,
                                         double eta = 1.0, LemmaTolerances tol = {}, unsigned workers = 0);

/// Loss-quarter increment under sigma and sigma/2 at a fixed I0.
struct PrefactorReport {
  double I0 = 0.0;
  double sigma = 0.0;
  double loss_full = 0.0;  ///< I_{1/4} - I_{1/2} at sigma
  double loss_half = 0.0;  ///< same at sigma / 2
  double gain_full = 0.0;  ///< I_{1/4} - I_0 at sigma (independent of sigma)
  double observed_ratio = 0.0;  ///< loss_half / loss_full
  double expected_ratio = 0.0;  ///< (1 - sigma/2) / (1 - sigma)
  double relative_error = 0.0;
  bool passed = false;
};

PrefactorReport compare_loss_prefactor(const ActionAngleChart& chart, double sigma, double I0,
                                       const IntegratorConfig& cfg, double eta = 1.0, double tolerance = 0.1);

struct StageRow {
  int k = 0;
  double I = 0.0;
  double T = 0.0;
  double dT = 0.0;
  double growth_ratio = 0.0;  ///< I_{j_k} / ((tau tau')^{-k} I_{j_{k-1}}^beta)
  double time_ratio = 0.0;    ///< (T_k - T_{k-1}) tau'^k
  double floor_ratio = 0.0;   ///< I_{j_k} / I_0^{l^k}
  double loglog = 0.0;        ///< log(log I_{j_k} / log I_0)
};

struct StageReport {
  std::vector<StageRow> rows;
  bool growth_evaluable = false;
  bool floor_evaluable = false;
  double c_growth = 0.0;  ///< (a) min growth_ratio
  double c_time = 0.0;    ///< (b) max time_ratio
  double c_floor = 0.0;   ///< (c) min floor_ratio
  double l = 0.0;
  double loglog_slope = 0.0;  ///< regression of loglog on k; compare with log(l)
  bool passed = false;
  std::vector<std::string> notes;
};

StageReport verify_stage_growth(const ConstructionLog& log, const ScheduleParams& schedule,
                                const EquationParams& params);

struct BlowupEstimate {
  double T_last = 0.0;
  double T_inf = 0.0;  ///< geometric-tail extrapolation
  double bound = 0.0;  ///< c' sum_k tau'^{-k}
  bool infinite_tail = false;  ///< fewer than two stages: no tail extrapolated
  double min_action_ratio = 0.0;  ///< min over stages of min_{cycle starts in stage} I / I_{j_{k-1}}
  bool passed = false;
  std::string message;
};

BlowupEstimate estimate_blowup_time(const ConstructionLog& log, const ScheduleParams& schedule,
                                    const StageReport& stages);

}  // namespace duffing
