#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "duffing/action_angle.hpp"
#include "duffing/errors.hpp"

using namespace duffing;

namespace {

const EquationParams kParams = EquationParams::make(3, 2);

const ActionAngleChart& reference_chart() {
  static const ActionAngleChart chart(PotentialModel::reference(kParams));
  return chart;
}

// Independent oracles: bisection on G(x) = h and the trapezoid rule for
// I(h) = 4 int_0^{x_+} sqrt(2 (h - G(x))) dx, both using the plain model G.
double bisect_turning_point(const PotentialModel& model, double h) {
  double lo = 0.0, hi = 1.0;
  while (eval_G(model, hi) < h) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (eval_G(model, mid) < h ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double trapezoid_action(const PotentialModel& model, double h, long intervals) {
  const double xp = bisect_turning_point(model, h);
  const double dx = xp / intervals;
  double sum = 0.5 * std::sqrt(2.0 * h);
  for (long i = 1; i < intervals; ++i) sum += std::sqrt(2.0 * std::max(h - eval_G(model, i * dx), 0.0));
  return 4.0 * sum * dx;
}

double angle_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

}  // namespace

TEST_CASE("turning point and action at h = 1 against oracles") {
  const auto& chart = reference_chart();
  // Bisection to full precision, frozen: 1.1726356368867652.
  const double xp_frozen = 1.1726356368867652;
  CHECK(bisect_turning_point(chart.model(), 1.0) == doctest::Approx(xp_frozen).epsilon(1e-14));
  CHECK(chart.turning_point(1.0) == doctest::Approx(xp_frozen).epsilon(1e-13));
  const auto [xm, xp] = turning_points(chart, 1.0);
  CHECK(xm == -xp);

  // Trapezoid with 10^7 intervals, frozen: 6.1846205138496915. The square-root endpoint limits
  // that oracle to about 1e-9 relative accuracy.
  const double I_frozen = 6.1846205138496915;
  CHECK(trapezoid_action(chart.model(), 1.0, 200000) == doctest::Approx(I_frozen).epsilon(1e-7));
  CHECK(action_of_energy(chart, 1.0) == doctest::Approx(I_frozen).epsilon(1e-6));
  CHECK(std::abs(action_of_energy(chart, 1.0) / I_frozen - 1.0) < 1e-8);
}

TEST_CASE("power-law action matches the closed form") {
  const ActionAngleChart chart(PotentialModel::power_law(kParams), {.I_min = 1.0, .I_max = 1e10});
  // I = 4 x_+ sqrt(2h) int_0^1 sqrt(1 - u^8) du with x_+ = (8h)^{1/8}.
  const double beta = std::tgamma(1.0 / 8.0) * std::tgamma(1.5) / std::tgamma(1.0 / 8.0 + 1.5);
  const double constant = 4.0 * std::sqrt(2.0) * std::pow(8.0, 1.0 / 8.0) * beta / 8.0;
  CHECK(constant == doctest::Approx(6.82892219168044).epsilon(1e-13));
  for (double h : {1e-2, 1.0, 1e3, 1e6, 1e9}) {
    CHECK(action_of_energy(chart, h) == doctest::Approx(constant * std::pow(h, 5.0 / 8.0)).epsilon(1e-10));
  }
  // Frequency h'(I) = 1/I'(h) for the power law.
  const double h = 50.0;
  const double expected_period = constant * 5.0 / 8.0 * std::pow(h, -3.0 / 8.0);
  CHECK(chart.level(h).period == doctest::Approx(expected_period).epsilon(1e-7));
}

TEST_CASE("domain errors") {
  const auto& chart = reference_chart();
  CHECK_THROWS_AS(chart.turning_point(0.0), DomainError);
  CHECK_THROWS_AS(chart.turning_point(-1.0), DomainError);
  CHECK_THROWS_AS(angle_action_from_state(chart, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(ActionAngleChart(PotentialModel::reference(kParams), {.I_min = 10.0, .I_max = 1.0}), ConfigError);
}

TEST_CASE("quarter angles are coordinate zeros") {
  const auto& chart = reference_chart();
  for (double I : {1e2, 1e4, 1e6, 1e9}) {
    const auto lv = chart.level_of_action(I);
    const auto [x0, y0] = chart.point_on_level(lv, 0.0);
    const auto [x1, y1] = chart.point_on_level(lv, 0.25);
    const auto [x2, y2] = chart.point_on_level(lv, 0.5);
    const auto [x3, y3] = chart.point_on_level(lv, 0.75);
    const double scale_x = lv.x_plus, scale_y = std::sqrt(2.0 * lv.h);
    CHECK(x0 == doctest::Approx(-lv.x_plus));
    CHECK(std::abs(y0) <= 1e-6 * scale_y);
    CHECK(std::abs(x1) <= 1e-10 * scale_x);
    CHECK(y1 == doctest::Approx(scale_y).epsilon(1e-10));
    CHECK(x2 == doctest::Approx(lv.x_plus));
    CHECK(std::abs(y2) <= 1e-6 * scale_y);
    CHECK(std::abs(x3) <= 1e-10 * scale_x);
    CHECK(y3 == doctest::Approx(-scale_y).epsilon(1e-10));
  }
}

TEST_CASE("round trip, energy identity and sign structure on random points") {
  const auto& chart = reference_chart();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_I = 0.0, worst_theta = 0.0, worst_energy = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double theta = unit(rng);
    const double I = std::pow(10.0, 3.0 + 6.0 * unit(rng));
    const auto [x, y] = state_from_angle_action(chart, theta, I);
    const auto back = angle_action_from_state(chart, x, y);
    worst_I = std::max(worst_I, std::abs(back.I / I - 1.0));
    worst_theta = std::max(worst_theta, angle_distance(back.theta, theta));
    const double h = energy_of_action(chart, I);
    worst_energy = std::max(worst_energy, std::abs(0.5 * y * y + eval_G(chart.model(), x) - h) / h);

    // y > 0 on (0, 1/2), x < 0 on (-1/4, 1/4).
    const double margin = 1e-6;
    if (theta > margin && theta < 0.5 - margin) REQUIRE(y > 0.0);
    if (theta > 0.5 + margin && theta < 1.0 - margin) REQUIRE(y < 0.0);
    if (theta > 0.25 + margin && theta < 0.75 - margin) REQUIRE(x > 0.0);
    if (theta < 0.25 - margin || theta > 0.75 + margin) REQUIRE(x < 0.0);
  }
  CHECK(worst_I < 1e-9);
  CHECK(worst_theta < 1e-9);
  CHECK(worst_energy < 1e-10);
}

TEST_CASE("partials: closed-form dx/dtheta against finite differences") {
  const auto& chart = reference_chart();
  for (double I : {1e3, 1e5, 1e7}) {
    for (double theta : {0.05, 0.1, 0.3, 0.45, 0.6, 0.9}) {
      const ChartPoint pt = chart.evaluate(theta, I);
      const double d = 1e-6;
      const double fd = (state_from_angle_action(chart, theta + d, I).first -
                         state_from_angle_action(chart, theta - d, I).first) / (2.0 * d);
      CHECK(pt.dx_dtheta == doctest::Approx(fd).epsilon(1e-5));
      const double dI = 1e-5 * I;
      const double fdI = (state_from_angle_action(chart, theta, I + dI).first -
                          state_from_angle_action(chart, theta, I - dI).first) / (2.0 * dI);
      CHECK(pt.dx_dI == doctest::Approx(fdI).epsilon(1e-4));
      // x3 has the sign of y.
      const ScaledPartials s = chart.scale(pt);
      CHECK((s.x3 > 0.0) == (theta < 0.5));
    }
  }
}

TEST_CASE("frequency is increasing and follows the I^alpha law") {
  const auto& chart = reference_chart();
  std::vector<double> Is, ws;
  double previous = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double I = std::pow(10.0, 2.0 + 0.2 * i);
    const double w = chart.frequency(I);
    CHECK(w > previous);
    previous = w;
    Is.push_back(I);
    ws.push_back(w);
  }
  const ScalingFit fit = fit_loglog(Is, ws, kParams.alpha, 0.02);
  CHECK(fit.passed());
  for (std::size_t i = 0; i < Is.size(); ++i) {
    const double ratio = ws[i] / std::pow(Is[i], kParams.alpha);
    CHECK(ratio > 0.05);
    CHECK(ratio < 0.2);
  }
}

TEST_CASE("chart lemma regressions") {
  const auto& chart = reference_chart();
  std::vector<double> grid;
  for (int i = 0; i < 25; ++i) grid.push_back(std::pow(10.0, 2.0 + 6.0 * i / 24.0));
  const LemmaReport report = compute_chart_lemmas(chart, grid, 0.02);
  CHECK(report.passed);
  CHECK(report.action.exponent_est == doctest::Approx(0.625).epsilon(0.02 / 0.625));
  CHECK(report.energy.exponent_est == doctest::Approx(1.6).epsilon(0.02 / 1.6));
  CHECK(report.frequency.exponent_est == doctest::Approx(0.6).epsilon(0.02 / 0.6));
  CHECK(report.curvature.exponent_est <= report.curvature_bound_exponent);
  CHECK(report.rows.size() == grid.size());
}

TEST_CASE("bound constants over a sampled grid") {
  const auto& chart = reference_chart();
  std::vector<double> thetas;
  for (int i = 0; i < 32; ++i) thetas.push_back((i + 0.5) / 32.0);
  const ChartBounds b = estimate_bounds(chart, {1e3, 1e4, 1e5}, thetas);
  CHECK(std::isfinite(b.B1));
  CHECK(std::isfinite(b.B2));
  CHECK(std::isfinite(b.B3));
  CHECK(b.C1 > 0.0);
  CHECK(b.C2 > 0.0);
  CHECK(b.B1 >= b.C1);
  CHECK(b.B3 >= b.C2);
}
