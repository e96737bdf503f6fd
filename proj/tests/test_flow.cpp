#include <doctest.h>

#include <cmath>
#include <random>

#include "duffing/errors.hpp"
#include "duffing/flow.hpp"

using namespace duffing;

namespace {

const EquationParams kParams = EquationParams::make(3, 2);

const ActionAngleChart& reference_chart() {
  static const ActionAngleChart chart(PotentialModel::reference(kParams));
  return chart;
}

ForcingProfile dip(double a, double b, double w, double low) {
  return ForcingProfile({{0.0, a, SegmentKind::constant, 1.0, 1.0},
                         {a, a + w, SegmentKind::linear, 1.0, low},
                         {a + w, b - w, SegmentKind::constant, low, low},
                         {b - w, b, SegmentKind::linear, low, 1.0},
                         {b, 1.0, SegmentKind::constant, 1.0, 1.0}});
}

// Energy of the autonomous system with constant forcing c.
double energy(const PotentialModel& model, double c, double x, double y) {
  return 0.5 * y * y + model.G(x) + c * ipow(x, 6) / 6.0;
}

}  // namespace

TEST_CASE("backend names") {
  CHECK(parse_backend("phase_plane") == FlowBackend::phase_plane);
  CHECK(parse_backend("angle_action") == FlowBackend::angle_action);
  CHECK(to_string(FlowBackend::angle_action) == "angle_action");
  CHECK_THROWS_AS(parse_backend("leapfrog"), ConfigError);
  IntegratorConfig bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  IntegratorConfig().validate();
}

TEST_CASE("forcing pieces tile an interval in both directions") {
  const ForcingProfile p = dip(0.3, 0.7, 0.1, 0.5);
  for (auto [a, b] : {std::pair{0.1, 2.3}, std::pair{2.3, 0.1}, std::pair{-1.7, 0.3}, std::pair{1.0, 3.0}}) {
    double cursor = a;
    int pieces = 0;
    for_each_piece(p, a, b, [&](double ta, double tb, const ForcingPiece& piece) {
      CHECK(ta == cursor);
      CHECK((b > a ? tb > ta : tb < ta));
      const double mid = 0.5 * (ta + tb);
      CHECK(piece(mid) == doctest::Approx(p(mid)).epsilon(1e-12));
      cursor = tb;
      ++pieces;
      return true;
    });
    CHECK(cursor == b);
    CHECK(pieces >= 2);
  }
  int calls = 0;
  for_each_piece(p, 0.0, 5.0, [&](double, double, const ForcingPiece&) { return ++calls < 3; });
  CHECK(calls == 3);
}

TEST_CASE("constant forcing conserves the modified energy") {
  const auto& model = reference_chart().model();
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double c = 2.0 * unit(rng);
    const PhaseState s0{0.0, 4.0 * (unit(rng) - 0.5), 4.0 * (unit(rng) - 0.5)};
    const PhaseState s1 = integrate_xy(s0, 3.0, ForcingProfile::constant(c), model, cfg);
    const double e0 = energy(model, c, s0.x, s0.y), e1 = energy(model, c, s1.x, s1.y);
    REQUIRE(std::abs(e1 - e0) <= 1e-9 * (1.0 + e0));
    REQUIRE(s1.t == 3.0);
  }
}

TEST_CASE("time reversal returns to the initial state") {
  const auto& model = reference_chart().model();
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  const ForcingProfile p = dip(0.2, 0.6, 0.05, 0.6);
  const PhaseState s0{0.15, 1.3, -0.4};
  const PhaseState fwd = integrate_xy(s0, 2.4, p, model, cfg);
  const PhaseState back = integrate_xy(fwd, 0.15, p, model, cfg);
  CHECK(back.t == 0.15);
  CHECK(std::abs(back.x - s0.x) < 1e-9);
  CHECK(std::abs(back.y - s0.y) < 1e-9);
}

TEST_CASE("quarter crossings follow the sign pattern and close the cycle") {
  const auto& chart = reference_chart();
  const ForcingProfile one;
  for (double I0 : {1e3, 1e5}) {
    IntegratorConfig cfg;
    FlowPoint pt = make_flow_point(chart, 0.0, 0.0, I0);
    CHECK(pt.x < 0.0);
    const double scale = std::abs(pt.x);
    for (int q = 1; q <= 4; ++q) {
      const FlowPoint next = advance_to_quarter(pt, one, chart, cfg);
      CHECK(next.theta == q * 0.25);
      CHECK(next.t > pt.t);
      switch (q) {
        case 1: CHECK(std::abs(next.x) < 1e-9 * scale); CHECK(next.y > 0.0); break;
        case 2: CHECK(next.x > 0.0); CHECK(std::abs(next.y) < 1e-6 * scale); break;
        case 3: CHECK(std::abs(next.x) < 1e-9 * scale); CHECK(next.y < 0.0); break;
        case 4: CHECK(next.x < 0.0); CHECK(std::abs(next.y) < 1e-6 * scale); break;
      }
      pt = next;
    }
    // With p == 1 the motion is periodic: the action returns after one turn.
    CHECK(std::abs(pt.I / I0 - 1.0) < 1e-8);
  }
}

TEST_CASE("unforced quarter time matches the chart") {
  const auto& chart = reference_chart();
  const ForcingProfile zero = ForcingProfile::constant(0.0);
  IntegratorConfig cfg;
  const double I0 = 2e4;
  const auto lv = chart.level_of_action(I0);
  FlowPoint pt = make_flow_point(chart, 0.0, 0.0, I0);
  for (int q = 1; q <= 4; ++q) pt = advance_to_quarter(pt, zero, chart, cfg);
  CHECK(pt.t == doctest::Approx(lv.period).epsilon(1e-9));
  CHECK(pt.I == doctest::Approx(I0).epsilon(1e-9));
}

TEST_CASE("event localisation is deterministic") {
  const auto& chart = reference_chart();
  const ForcingProfile p = dip(0.01, 0.05, 0.005, 0.7);
  IntegratorConfig cfg;
  std::array<FlowPoint, 2> runs;
  for (auto& run : runs) {
    run = make_flow_point(chart, 0.0, 0.0, 5e4);
    for (int q = 0; q < 8; ++q) run = advance_to_quarter(run, p, chart, cfg);
  }
  CHECK(runs[0].t == runs[1].t);
  CHECK(runs[0].x == runs[1].x);
  CHECK(runs[0].y == runs[1].y);
  CHECK(runs[0].I == runs[1].I);
}

TEST_CASE("backends agree on forced quarters") {
  const auto& chart = reference_chart();
  const ForcingProfile p = dip(0.005, 0.03, 0.004, 0.6);
  IntegratorConfig pp, aa;
  aa.backend = FlowBackend::angle_action;
  FlowPoint a = make_flow_point(chart, 0.0, 0.0, 1e4), b = a;
  for (int q = 0; q < 4; ++q) {
    a = advance_to_quarter(a, p, chart, pp);
    b = advance_to_quarter(b, p, chart, aa);
    CHECK(b.theta == a.theta);
    CHECK(b.t == doctest::Approx(a.t).epsilon(1e-7));
    CHECK(b.I == doctest::Approx(a.I).epsilon(1e-7));
  }
  CHECK(a.I > 1e4);  // a dip on the first quarters raises the action
}

TEST_CASE("advance_to_angle lands on the requested angle") {
  const auto& chart = reference_chart();
  const ForcingProfile one;
  IntegratorConfig cfg;
  const FlowPoint start = make_flow_point(chart, 0.0, 0.0, 1e4);
  const FlowPoint mid = advance_to_angle(start, 0.0625, one, chart, cfg);
  CHECK(mid.theta == 0.0625);
  const auto [x, y] = state_from_angle_action(chart, 0.0625, mid.I);
  CHECK(mid.x == doctest::Approx(x).epsilon(1e-6));
  CHECK(mid.y == doctest::Approx(y).epsilon(1e-6));
  CHECK_THROWS_AS(advance_to_angle(start, 0.3, one, chart, cfg), ConfigError);
  CHECK_THROWS_AS(advance_to_angle(start, -0.1, one, chart, cfg), ConfigError);
}

TEST_CASE("a crossing outside the time limit is infeasible") {
  const auto& chart = reference_chart();
  IntegratorConfig cfg;
  const FlowPoint start = make_flow_point(chart, 0.0, 0.0, 1e3);
  CHECK_THROWS_AS(advance_to_quarter(start, ForcingProfile(), chart, cfg, 1e-6), InfeasibleError);
}

TEST_CASE("phase plane and chart coordinates agree over one period") {
  const auto& chart = reference_chart();
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  const double T = chart.level_of_action(1e4).period;
  const auto free = chart_consistency(1e4, T, ForcingProfile::constant(0.0), chart, cfg);
  CHECK(free.divergence < 1e-7);
  const auto forced = chart_consistency(1e4, T, ForcingProfile(), chart, cfg);
  CHECK(forced.divergence < 1e-6);
  CHECK_THROWS_AS(chart_consistency(1e4, T, ForcingProfile(), chart, cfg, 0.0, 1e-30), InvariantViolation);
}

TEST_CASE("trajectory samples") {
  const auto& chart = reference_chart();
  const ForcingProfile p = dip(0.1, 0.4, 0.05, 0.5);
  IntegratorConfig cfg;
  const auto samples = sample_trajectory(make_flow_point(chart, 0.0, 0.0, 1e3), 0.5, 0.01, p, chart, cfg);
  REQUIRE(samples.size() >= 50);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    CHECK(s.p == p(s.t));
    if (i > 0) CHECK(s.t > samples[i - 1].t);
    const auto aa = angle_action_from_state(chart, s.x, s.y);
    CHECK(aa.I == doctest::Approx(s.I).epsilon(1e-9));
  }
  CHECK_THROWS_AS(sample_trajectory(make_flow_point(chart, 0.0, 0.0, 1e3), 0.5, 0.0, p, chart, cfg), ConfigError);
}
