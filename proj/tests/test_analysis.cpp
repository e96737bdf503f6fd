#include <doctest.h>

#include <cmath>

#include "duffing/analysis.hpp"
#include "duffing/errors.hpp"

using namespace duffing;

namespace {

const EquationParams kParams = EquationParams::make(3, 2);

const ActionAngleChart& reference_chart() {
  static const ActionAngleChart chart(PotentialModel::reference(kParams));
  return chart;
}

// Stages that follow the growth and time laws exactly with constants c and c'.
ConstructionLog synthetic_log(double c, double c_time, int K) {
  const ScheduleParams s;
  ConstructionLog log;
  log.stages.push_back({0, 0, 0.0, 1e6, 0.0});
  for (int k = 1; k <= K; ++k) {
    const auto& prev = log.stages.back();
    const double I = c * std::pow(s.tau * s.tau_prime, -k) * std::pow(prev.I, kParams.beta);
    const double T = prev.T + c_time * std::pow(s.tau_prime, -k);
    log.stages.push_back({k, prev.j + 10, T, I, std::pow(s.tau, -k)});
  }
  return log;
}

}  // namespace

TEST_CASE("quarter lemma scaling at sigma = 1/2") {
  const auto rep = verify_quarter_lemmas(reference_chart(), 0.5, {1e3, 1e4, 1e5, 1e6}, IntegratorConfig{});
  REQUIRE(rep.fits.size() == 11);
  CHECK(rep.passed);
  const double a = kParams.alpha, g = kParams.gamma;
  for (int q = 0; q < 4; ++q) {
    CHECK(rep.fits[q].expected == doctest::Approx(-a));
    CHECK(rep.fits[q].passed());
    CHECK(rep.fits[4 + q].expected == doctest::Approx(g));
    CHECK(rep.fits[4 + q].passed());
  }
  CHECK(rep.fits[8].exponent_est == doctest::Approx(-a).epsilon(0.03 / a));
  CHECK(rep.fits[9].exponent_est == doctest::Approx(g).epsilon(0.05 / g));
  CHECK(rep.fits[10].passed());
  for (const auto& s : rep.samples) {
    CHECK(s.gain > 0.0);
    CHECK(s.sixteenth_window > 0.0);
    CHECK(s.sixteenth_window < s.cycle_time);
    double total = 0.0;
    for (double d : s.durations) total += d;
    CHECK(total == doctest::Approx(s.cycle_time).epsilon(1e-12));
  }
}

TEST_CASE("quarter lemma grid requirements") {
  const auto& chart = reference_chart();
  CHECK_THROWS_AS(verify_quarter_lemmas(chart, 0.5, {1e3, 1e4, 1e6}, IntegratorConfig{}), ConfigError);
  CHECK_THROWS_AS(verify_quarter_lemmas(chart, 0.5, {1e3, 2e3, 1e4, 1e5}, IntegratorConfig{}), ConfigError);
}

TEST_CASE("loss prefactor follows (1 - sigma/2) / (1 - sigma)") {
  const auto rep = compare_loss_prefactor(reference_chart(), 0.5, 1e5, IntegratorConfig{});
  CHECK(rep.expected_ratio == doctest::Approx(1.5));
  CHECK(rep.passed);
  CHECK(rep.relative_error < 0.02);
  CHECK(rep.loss_half > rep.loss_full);  // a shallower dip loses more
  CHECK(rep.loss_full < rep.gain_full);  // the jump removes a fraction close to 1 - sigma
  CHECK(rep.loss_full / rep.gain_full == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("stage growth on synthetic stages recovers the constants") {
  const ScheduleParams s;
  const auto log = synthetic_log(5.0, 0.3, 3);
  const StageReport rep = verify_stage_growth(log, s, kParams);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.passed);
  CHECK(rep.c_growth == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(rep.c_time == doctest::Approx(0.3).epsilon(1e-9));
  for (const auto& row : rep.rows) {
    CHECK(row.growth_ratio == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(row.time_ratio == doctest::Approx(0.3).epsilon(1e-9));
  }
  const BlowupEstimate est = estimate_blowup_time(log, s, rep);
  CHECK(est.bound == doctest::Approx(0.3 / 15.0));
  CHECK(est.T_inf == doctest::Approx(0.3 / 15.0).epsilon(1e-12));  // exact geometric tail
  CHECK(est.passed);

  const auto single = synthetic_log(5.0, 0.3, 1);
  const StageReport one = verify_stage_growth(single, s, kParams);
  CHECK_FALSE(one.passed);
  CHECK_FALSE(one.growth_evaluable);
  CHECK_FALSE(one.notes.empty());
  const BlowupEstimate tail = estimate_blowup_time(single, s, one);
  CHECK(tail.infinite_tail);
  CHECK_FALSE(tail.passed);

  const BlowupEstimate slow = estimate_blowup_time(synthetic_log(5.0, 20.0, 3), s, verify_stage_growth(synthetic_log(5.0, 20.0, 3), s, kParams));
  CHECK_FALSE(slow.passed);
  CHECK(slow.bound > 1.0);
}

TEST_CASE("stage growth and blow-up time of the default construction") {
  const ScheduleParams s;
  const Construction c = build_profile(reference_chart(), s, IntegratorConfig{});
  const StageReport rep = verify_stage_growth(c.log, s, kParams);
  CHECK(rep.passed);
  CHECK(rep.c_growth > 0.0);
  CHECK(rep.c_floor > 0.0);
  CHECK(rep.loglog_slope > 0.0);
  const BlowupEstimate est = estimate_blowup_time(c.log, s, rep);
  CHECK(est.passed);
  CHECK(est.T_inf >= est.T_last);
  CHECK(est.T_inf < 1.0);
  CHECK(est.bound < 1.0);
  CHECK(est.min_action_ratio >= 1.0);
}
