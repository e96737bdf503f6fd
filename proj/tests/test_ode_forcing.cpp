#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "duffing/errors.hpp"
#include "duffing/forcing.hpp"
#include "duffing/ode.hpp"

using namespace duffing;

namespace {

using DP2 = DormandPrince<double, 2>;
using V2 = DP2::Vector;

// A dip to `low` on [a, b] with linear ramps of width w on either side.
ForcingProfile dip(double a, double b, double w, double low) {
  return ForcingProfile({{0.0, a, SegmentKind::constant, 1.0, 1.0},
                         {a, a + w, SegmentKind::linear, 1.0, low},
                         {a + w, b - w, SegmentKind::constant, low, low},
                         {b - w, b, SegmentKind::linear, low, 1.0},
                         {b, 1.0, SegmentKind::constant, 1.0, 1.0}});
}

bool has_issue(const ValidationReport& r, const std::string& name) {
  for (const auto& issue : r.issues)
    if (issue.invariant == name) return true;
  return false;
}

}  // namespace

TEST_CASE("harmonic oscillator over ten periods") {
  DP2 dp({.rel_tol = 1e-12, .abs_tol = 1e-14});
  auto f = [](double, const V2& y) { return V2(y[1], -y[0]); };
  const double T = 20.0 * std::numbers::pi;
  const auto r = dp.integrate(f, 0.0, V2(1.0, 0.0), T);
  CHECK(r.t == T);
  CHECK(std::abs(r.y[0] - 1.0) < 1e-9);
  CHECK(std::abs(r.y[1]) < 1e-9);
  CHECK_FALSE(r.event);

  // Backwards to the start recovers the initial state.
  DP2 back({.rel_tol = 1e-12, .abs_tol = 1e-14});
  const auto b = back.integrate(f, T, r.y, 0.0);
  CHECK(std::abs(b.y[0] - 1.0) < 1e-9);
  CHECK(std::abs(b.y[1]) < 1e-9);
}

TEST_CASE("error scales with tolerance") {
  auto f = [](double t, const Eigen::Matrix<double, 1, 1>& y) {
    return Eigen::Matrix<double, 1, 1>(-2.0 * t * y[0]);
  };
  double previous = 1.0;
  for (double tol : {1e-6, 1e-8, 1e-10, 1e-12}) {
    DormandPrince<double, 1> dp({.rel_tol = tol, .abs_tol = tol * 1e-2});
    const auto r = dp.integrate(f, 0.0, Eigen::Matrix<double, 1, 1>(1.0), 2.0);
    const double err = std::abs(r.y[0] - std::exp(-4.0));
    CHECK(err < 100.0 * tol);
    CHECK(err <= previous);
    previous = err;
  }
}

TEST_CASE("rising event is located precisely and deterministically") {
  auto f = [](double, const V2& y) { return V2(y[1], -y[0]); };
  auto g = [](double, const V2& y) { return -y[0]; };  // x crosses zero downwards at pi/2
  std::array<DP2::Result, 2> runs;
  for (auto& run : runs) {
    DP2 dp({.rel_tol = 1e-12, .abs_tol = 1e-14});
    RisingEvent<decltype(g)> ev{g};
    run = dp.integrate(f, 0.0, V2(1.0, 0.0), 10.0, ev);
  }
  CHECK(runs[0].event);
  CHECK(std::abs(runs[0].t - std::numbers::pi / 2) < 1e-12);
  CHECK(runs[0].t == runs[1].t);
  CHECK(runs[0].y == runs[1].y);

  DP2 dp;
  auto below = [](double, const V2&) { return -1.0; };
  RisingEvent<decltype(below)> never{below};
  auto rn = dp.integrate(f, 0.0, V2(1.0, 0.0), 1.0, never);
  CHECK_FALSE(rn.event);
  CHECK(rn.t == 1.0);
}

TEST_CASE("step budget and overflow are reported") {
  DP2 dp({.rel_tol = 1e-12, .abs_tol = 1e-14, .max_steps = 10});
  auto f = [](double, const V2& y) { return V2(y[1], -y[0]); };
  CHECK_THROWS_AS(dp.integrate(f, 0.0, V2(1.0, 0.0), 100.0), NumericalError);
  DormandPrince<double, 1> blow;
  auto g = [](double, const Eigen::Matrix<double, 1, 1>& y) { return Eigen::Matrix<double, 1, 1>(y[0] * y[0]); };
  CHECK_THROWS_AS(blow.integrate(g, 0.0, Eigen::Matrix<double, 1, 1>(1.0), 2.0), NumericalError);
}

TEST_CASE("segment and profile evaluation") {
  const ForcingProfile unit;
  CHECK(unit(0.3) == 1.0);
  CHECK(unit.mean() == 1.0);
  CHECK(unit.last_modified() == 0.0);
  CHECK(validate_profile(unit).valid);

  const ForcingProfile p = dip(0.3, 0.7, 0.1, 0.5);
  CHECK(p(0.35) == doctest::Approx(0.75));
  CHECK(p(1.35) == doctest::Approx(0.75));
  CHECK(p(-0.65) == doctest::Approx(0.75));
  CHECK(p(0.5) == 0.5);
  CHECK(p.locate(0.3) == 1);
  CHECK(p.locate(0.0) == 0);
  CHECK(p.locate(1.0) == 4);
  CHECK(p.mean() == doctest::Approx(0.3 + 0.075 + 0.1 + 0.075 + 0.3));
  CHECK(p.min_value() == 0.5);
  CHECK(p.max_value() == 1.0);
  CHECK(p.last_modified() == 0.7);
  CHECK(p.breakpoints().size() == 6);
  CHECK(validate_profile(p).valid);
  CHECK(validate_profile(p, 2.0, {}, 0.7).valid);
  CHECK(has_issue(validate_profile(p, 2.0, {}, 0.6), "trailing"));
  CHECK_THROWS_AS(ForcingProfile(std::vector<Segment>{}), ConfigError);
}

TEST_CASE("validation catches corrupted profiles") {
  const ForcingProfile p = dip(0.3, 0.7, 0.1, 0.5);
  {
    auto segs = p.segments();
    segs[2].v0 += 1e-9;
    segs[2].v1 += 1e-9;
    CHECK(has_issue(validate_profile(ForcingProfile(segs)), "continuity"));
  }
  {
    auto segs = p.segments();
    segs[3].t0 += 1e-9;
    CHECK(has_issue(validate_profile(ForcingProfile(segs)), "tiling"));
  }
  {
    auto segs = p.segments();
    segs.back().v1 = 0.9;
    segs.back().kind = SegmentKind::linear;
    CHECK(has_issue(validate_profile(ForcingProfile(segs)), "continuity"));
  }
  CHECK(has_issue(validate_profile(dip(0.3, 0.7, 0.1, 0.4)), "range"));
  CHECK(validate_profile(dip(0.3, 0.7, 0.1, 0.4), 1.0 / 0.6).valid);
  CHECK(has_issue(validate_profile(ForcingProfile::constant(1.2)), "range"));

  const ForcingProfile shallow = dip(0.5, 0.8, 0.05, 0.9);
  const auto ok = validate_profile(shallow, 2.0, {0.0, 0.1, 0.2, 0.3});  // bounds 1/2, 1/4, 1/8
  CHECK(ok.valid);
  CHECK(ok.stages.size() == 3);
  CHECK(ok.stages[2].oscillation == doctest::Approx(0.1));
  const auto bad = validate_profile(shallow, 2.0, {0.0, 0.1, 0.2, 0.3, 0.4});  // 1/16 < 0.1
  CHECK(has_issue(bad, "oscillation"));
  CHECK(validate_profile(shallow, 2.0, {0.0, 0.1, 0.2, 0.3, 0.85}).valid);  // after the dip
}

TEST_CASE("replace_tail splits the cut segment and closes with a constant") {
  ForcingProfile p;
  p.replace_tail(0.25, {{0.25, 0.3, SegmentKind::linear, 1.0, 0.6}, {0.3, 0.4, SegmentKind::constant, 0.6, 0.6}});
  CHECK(p.segments().size() == 4);
  CHECK(p(0.9) == 0.6);
  CHECK(has_issue(validate_profile(p), "continuity"));  // the wrap 0.6 -> 1 is open until closed
  p.replace_tail(0.35, {{0.35, 0.4, SegmentKind::constant, 0.6, 0.6}, {0.4, 0.45, SegmentKind::linear, 0.6, 1.0}});
  CHECK(validate_profile(p).valid);
  CHECK(p.last_modified() == 0.45);
  CHECK(p(0.35) == 0.6);
  CHECK_THROWS_AS(p.replace_tail(0.5, {{0.51, 0.6, SegmentKind::constant, 1.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(p.replace_tail(0.9, {{0.9, 1.1, SegmentKind::constant, 1.0, 1.0}}), InfeasibleError);
  CHECK_THROWS_AS(p.replace_tail(1.0, {}), ConfigError);
}

TEST_CASE("random continuous profiles validate and integrate exactly") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    ForcingProfile p;
    double t = 0.0;
    const int dips = 1 + static_cast<int>(unit(rng) * 6);
    double expected_deficit = 0.0;
    for (int d = 0; d < dips; ++d) {
      const double w = 0.002 + 0.01 * unit(rng);
      const double plateau = 0.02 * unit(rng);
      const double start = t + 0.1 * unit(rng) / dips;
      if (start + 2 * w + plateau >= 1.0) break;
      const double low = 0.5 + 0.5 * unit(rng);
      p.replace_tail(start, {{start, start + w, SegmentKind::linear, 1.0, low},
                             {start + w, start + w + plateau, SegmentKind::constant, low, low},
                             {start + w + plateau, start + 2 * w + plateau, SegmentKind::linear, low, 1.0}});
      expected_deficit += (1.0 - low) * (w + plateau);
      t = start + 2 * w + plateau;
    }
    const auto r = validate_profile(p);
    REQUIRE(r.valid);
    REQUIRE(p.mean() == doctest::Approx(1.0 - expected_deficit).epsilon(1e-12));
    REQUIRE(p.min_value() >= 0.5);
    // Periodicity of evaluation.
    const double s = unit(rng);
    REQUIRE(p(s) == doctest::Approx(p(s + 3.0)).epsilon(1e-12));
  }
}
