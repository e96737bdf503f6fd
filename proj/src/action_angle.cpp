#include "duffing/action_angle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "duffing/errors.hpp"
#include "duffing/quadrature.hpp"

namespace duffing {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr int kUniformQuarterPanels = 8;

double reduce_angle(double theta) {
  double r = theta - std::floor(theta);
  return r >= 1.0 ? 0.0 : r;
}

// Fritsch-Carlson slopes for a monotone cubic Hermite interpolant.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      const double w1 = 2 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
      const double w2 = (x[i + 1] - x[i]) + 2 * (x[i] - x[i - 1]);
      m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  return m;
}

}  // namespace

ActionAngleChart::ActionAngleChart(PotentialModel model, ChartOptions options)
    : model_(std::move(model)), options_(std::move(options)) {
  if (!(options_.I_min > 0.0) || !(options_.I_max > options_.I_min) || options_.nodes_per_decade < 2) {
    throw ConfigError("chart needs 0 < I_min < I_max and nodes_per_decade >= 2");
  }
  const auto& p = model_.params();
  const double exponent = (p.n + 2.0) / (2.0 * p.n + 2.0);
  // Bracket the energy range by the power law I ~ C h^exponent, widening until it covers.
  const double probe = action_of_energy(1.0);
  double h_lo = std::pow(options_.I_min / probe, 1.0 / exponent) * 0.5;
  double h_hi = std::pow(options_.I_max / probe, 1.0 / exponent) * 2.0;
  while (action_of_energy(h_lo) > options_.I_min) h_lo *= 0.5;
  while (action_of_energy(h_hi) < options_.I_max) h_hi *= 2.0;

  const double decades = std::log10(h_hi / h_lo);
  const auto count = static_cast<std::size_t>(std::ceil(decades * options_.nodes_per_decade)) + 1;
  const double step = std::log(h_hi / h_lo) / static_cast<double>(count - 1);
  table_log_h_.resize(count);
  table_log_I_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double log_h = std::log(h_lo) + step * static_cast<double>(i);
    table_log_h_[i] = log_h;
    table_log_I_[i] = std::log(action_of_energy(std::exp(log_h)));
    if (i > 0 && !(table_log_I_[i] > table_log_I_[i - 1])) {
      std::ostringstream os;
      os << "I(h) not strictly increasing at h = " << std::exp(log_h);
      throw InvariantViolation(os.str());
    }
  }
  table_slopes_ = monotone_slopes(table_log_I_, table_log_h_);

  if (!options_.certify_I_grid.empty()) {
    std::vector<double> thetas;
    for (int i = 0; i < 64; ++i) thetas.push_back((i + 0.5) / 64.0);
    for (int i = 0; i <= 8; ++i) thetas.push_back(1.0 / 16.0 + i / 64.0);
    bounds_ = estimate_bounds(options_.certify_I_grid, thetas);
  }
}

double ActionAngleChart::turning_point(double h) const {
  if (!(h > 0.0) || !std::isfinite(h)) {
    std::ostringstream os;
    os << "turning point requires h > 0, got " << h;
    throw DomainError(os.str());
  }
  const int k = model_.params().potential_power() + 1;
  double lo = std::pow(k * h / model_.a_max(), 1.0 / k);
  double hi = std::pow(k * h / model_.a_min(), 1.0 / k);
  double x = std::clamp(std::pow(k * h / model_.cos_coeffs()[0], 1.0 / k), lo, hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = model_.G(x) - h;
    if (f == 0.0) return x;
    if (f > 0.0) hi = x; else lo = x;
    double next = x - f / model_.G1(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * x) return next;
    x = next;
  }
  std::ostringstream os;
  os << "turning point iteration did not converge for h = " << h;
  throw NumericalError(os.str());
}

double ActionAngleChart::energy_gap(const EnergyLevel& level, double x) const {
  const double ax = std::min(std::abs(x), level.x_plus);
  if (level.x_plus - ax <= model_.panel_width()) return level.residual + model_.G_between(ax, level.x_plus);
  return level.h - model_.G(ax);
}

EnergyLevel ActionAngleChart::level(double h) const {
  EnergyLevel lv;
  lv.h = h;
  lv.x_plus = turning_point(h);
  lv.residual = h - model_.G(lv.x_plus);

  auto& psi = lv.psi;
  psi.push_back(0.0);
  for (int j = 1; j < kUniformQuarterPanels; ++j) psi.push_back(kHalfPi * j / kUniformQuarterPanels);
  const double w = model_.panel_width();
  for (double xk = w; xk < lv.x_plus; xk += w) psi.push_back(std::asin(xk / lv.x_plus));
  psi.push_back(kHalfPi);
  std::sort(psi.begin(), psi.end());
  psi.erase(std::unique(psi.begin(), psi.end(), [](double a, double b) { return b - a < 1e-9; }), psi.end());
  psi.back() = kHalfPi;

  const auto& rule = GL16::instance();
  lv.cumulative.assign(psi.size(), 0.0);
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < psi.size(); ++k) {
    const double mid = 0.5 * (psi[k] + psi[k + 1]);
    const double half = 0.5 * (psi[k + 1] - psi[k]);
    double time = 0.0, arc = 0.0;
    for (int i = 0; i < 16; ++i) {
      const double ps = mid + half * rule.nodes(i);
      const double dx = lv.x_plus * std::cos(ps);
      const double v = std::sqrt(2.0 * energy_gap(lv, lv.x_plus * std::sin(ps)));
      time += rule.weights(i) * dx / v;
      arc += rule.weights(i) * dx * v;
    }
    lv.cumulative[k + 1] = lv.cumulative[k] + time * half;
    area += arc * half;
  }
  lv.action = 4.0 * area;
  lv.period = 4.0 * lv.quarter_time();
  if (!std::isfinite(lv.action) || !std::isfinite(lv.period) || !(lv.period > 0.0)) {
    std::ostringstream os;
    os << "level quadrature failed at h = " << h;
    throw NumericalError(os.str());
  }
  return lv;
}

double ActionAngleChart::interpolate_log_h(double log_I) const {
  const auto& xs = table_log_I_;
  auto it = std::upper_bound(xs.begin(), xs.end(), log_I);
  std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - xs.begin()), 1, xs.size() - 1) - 1;
  const double dx = xs[i + 1] - xs[i];
  const double t = (log_I - xs[i]) / dx;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * table_log_h_[i] + (t3 - 2 * t2 + t) * dx * table_slopes_[i] +
         (-2 * t3 + 3 * t2) * table_log_h_[i + 1] + (t3 - t2) * dx * table_slopes_[i + 1];
}

EnergyLevel ActionAngleChart::level_of_action(double I) const {
  if (!(I >= table_I_min() * (1 - 1e-12)) || !(I <= table_I_max() * (1 + 1e-12))) {
    std::ostringstream os;
    os << "action " << I << " outside chart table [" << table_I_min() << ", " << table_I_max()
       << "]; extend the chart";
    throw RangeError(os.str());
  }
  double h = std::exp(interpolate_log_h(std::log(I)));
  EnergyLevel lv = level(h);
  for (int iter = 0; iter < 4; ++iter) {
    const double r = lv.action - I;
    if (std::abs(r) <= 1e-14 * I && iter > 0) break;
    h -= r / lv.period;
    lv = level(h);
  }
  if (std::abs(lv.action - I) > 1e-11 * I) {
    std::ostringstream os;
    os << "h(I) polish failed at I = " << I << " (residual " << lv.action - I << ")";
    throw NumericalError(os.str());
  }
  return lv;
}

double ActionAngleChart::quarter_integral(const EnergyLevel& lv, double psi) const {
  if (psi <= 0.0) return 0.0;
  if (psi >= kHalfPi) return lv.quarter_time();
  auto it = std::upper_bound(lv.psi.begin(), lv.psi.end(), psi);
  const std::size_t k = static_cast<std::size_t>(it - lv.psi.begin()) - 1;
  const double partial = GL16::instance().integrate(
      [&](double ps) {
        return lv.x_plus * std::cos(ps) / std::sqrt(2.0 * energy_gap(lv, lv.x_plus * std::sin(ps)));
      },
      lv.psi[k], psi);
  return lv.cumulative[k] + partial;
}

double ActionAngleChart::solve_quarter(const EnergyLevel& lv, double target) const {
  if (target <= 0.0) return 0.0;
  if (target >= lv.quarter_time()) return kHalfPi;
  auto it = std::upper_bound(lv.cumulative.begin(), lv.cumulative.end(), target);
  const std::size_t k = static_cast<std::size_t>(it - lv.cumulative.begin()) - 1;
  double lo = lv.psi[k], hi = lv.psi[k + 1];
  double psi = lo + (hi - lo) * (target - lv.cumulative[k]) / (lv.cumulative[k + 1] - lv.cumulative[k]);
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * lv.quarter_time();
  for (int iter = 0; iter < 60; ++iter) {
    const double f = quarter_integral(lv, psi) - target;
    if (f > 0.0) hi = psi; else lo = psi;
    if (std::abs(f) <= tol) return psi;
    const double slope = lv.x_plus * std::cos(psi) / std::sqrt(2.0 * energy_gap(lv, lv.x_plus * std::sin(psi)));
    double next = psi - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - psi) <= 1e-16) return next;
    psi = next;
  }
  std::ostringstream os;
  os << "angle inversion did not converge (h = " << lv.h << ", target = " << target << ")";
  throw NumericalError(os.str());
}

std::pair<double, double> ActionAngleChart::point_on_level(const EnergyLevel& lv, double theta) const {
  theta = reduce_angle(theta);
  const bool upper = theta <= 0.5;
  const double elapsed = (upper ? theta : 1.0 - theta) * lv.period;  // time since (x_-, 0)
  const double q = lv.quarter_time();
  const bool right = elapsed > q;
  const double psi = solve_quarter(lv, right ? elapsed - q : q - elapsed);
  if (psi >= kHalfPi) return {right ? lv.x_plus : -lv.x_plus, 0.0};
  const double x = (right ? 1.0 : -1.0) * lv.x_plus * std::sin(psi);
  const double v = std::sqrt(2.0 * std::max(energy_gap(lv, x), 0.0));
  return {x, upper ? v : -v};
}

double ActionAngleChart::angle_on_level(const EnergyLevel& lv, double x, double y) const {
  const double ax = std::min(std::abs(x), lv.x_plus);
  double psi = 0.0;
  double gap = lv.x_plus - ax;
  if (y != 0.0 && gap <= model_.panel_width()) {
    // Near a turning point x_+ - |x| is recovered from the kinetic energy y^2/2 = G(x_+) - G(|x|),
    // which is far better conditioned than subtracting x from x_+.
    const double kinetic = 0.5 * y * y;
    gap = kinetic / model_.G1(std::max(ax, lv.x_plus * 0.5));
    for (int iter = 0; iter < 50; ++iter) {
      const double f = model_.G_between(ax, ax + gap) - kinetic;
      const double next = gap - f / model_.G1(ax + gap);
      if (!(next > 0.0)) { gap *= 0.5; continue; }
      const bool done = std::abs(next - gap) <= 1e-15 * gap;
      gap = next;
      if (done) break;
    }
    psi = std::atan2(ax, std::sqrt(gap * (2.0 * ax + gap)));
  } else if (y == 0.0 && ax > 0.0) {
    psi = kHalfPi;
  } else {
    psi = std::atan2(ax, std::sqrt((lv.x_plus - ax) * (lv.x_plus + ax)));
  }
  const double partial = quarter_integral(lv, psi);
  const double elapsed = lv.quarter_time() + (x < 0.0 ? -partial : partial);
  const double fraction = elapsed / lv.period;
  return y >= 0.0 ? fraction : 1.0 - fraction;
}

ChartPoint ActionAngleChart::evaluate(double theta, double I, bool with_dI) const {
  ChartPoint pt;
  pt.theta = reduce_angle(theta);
  pt.I = I;
  const EnergyLevel lv = level_of_action(I);
  pt.h = lv.h;
  std::tie(pt.x, pt.y) = point_on_level(lv, pt.theta);
  pt.dh_dI = 1.0 / lv.period;
  pt.dx_dtheta = pt.y * lv.period;
  if (with_dI) {
    // Neighbouring levels at h -/+ h'(I) * 1e-6 I; their exact actions give the difference quotient.
    const double dh = 1e-6 * I * pt.dh_dI;
    const EnergyLevel up = level(lv.h + dh);
    const EnergyLevel dn = level(lv.h - dh);
    pt.dx_dI = (point_on_level(up, pt.theta).first - point_on_level(dn, pt.theta).first) / (up.action - dn.action);
  }
  return pt;
}

std::pair<double, double> ActionAngleChart::state_from_angle_action(double theta, double I) const {
  return point_on_level(level_of_action(I), theta);
}

AngleActionState ActionAngleChart::angle_action_from_state(double x, double y) const {
  if (x == 0.0 && y == 0.0) throw DomainError("the origin has no angle-action coordinates");
  const EnergyLevel lv = level(0.5 * y * y + model_.G(x));
  return {angle_on_level(lv, x, y), lv.action};
}

ScaledPartials ActionAngleChart::scale(const ChartPoint& pt) const {
  const auto& p = model_.params();
  const double s = std::pow(pt.I, -p.chart_scale());
  return {pt.x * s, pt.dx_dI * std::pow(pt.I, p.alpha), pt.dx_dtheta * s};
}

ScaledPartials ActionAngleChart::scaled_partials(double theta, double I) const { return scale(evaluate(theta, I)); }

ChartBounds ActionAngleChart::estimate_bounds(const std::vector<double>& I_grid,
                                              const std::vector<double>& theta_grid) const {
  if (I_grid.empty() || theta_grid.empty()) throw ConfigError("estimate_bounds needs nonempty grids");
  ChartBounds b;
  b.C1 = b.C2 = std::numeric_limits<double>::infinity();
  b.I_lo = *std::min_element(I_grid.begin(), I_grid.end());
  b.I_hi = *std::max_element(I_grid.begin(), I_grid.end());
  std::vector<double> thetas = theta_grid;
  // The (C) window is always sampled, whatever the caller's grid.
  for (int i = 0; i <= 8; ++i) thetas.push_back(1.0 / 16.0 + i / 64.0);
  for (double I : I_grid) {
    for (double th : thetas) {
      const ScaledPartials s = scaled_partials(th, I);
      b.B1 = std::max(b.B1, std::abs(s.x1));
      b.B2 = std::max(b.B2, std::abs(s.x2));
      b.B3 = std::max(b.B3, std::abs(s.x3));
      const double r = reduce_angle(th);
      if (r >= 1.0 / 16.0 - 1e-15 && r <= 3.0 / 16.0 + 1e-15) {
        b.C1 = std::min(b.C1, -s.x1);
        b.C2 = std::min(b.C2, s.x3);
      }
    }
  }
  return b;
}

std::pair<double, double> turning_points(const ActionAngleChart& chart, double h) {
  const double xp = chart.turning_point(h);
  return {-xp, xp};
}
double action_of_energy(const ActionAngleChart& chart, double h) { return chart.action_of_energy(h); }
double energy_of_action(const ActionAngleChart& chart, double I) { return chart.energy_of_action(I); }
std::pair<double, double> state_from_angle_action(const ActionAngleChart& chart, double theta, double I) {
  return chart.state_from_angle_action(theta, I);
}
AngleActionState angle_action_from_state(const ActionAngleChart& chart, double x, double y) {
  return chart.angle_action_from_state(x, y);
}
ScaledPartials scaled_partials(const ActionAngleChart& chart, double theta, double I) {
  return chart.scaled_partials(theta, I);
}
ChartBounds estimate_bounds(const ActionAngleChart& chart, const std::vector<double>& I_grid,
                            const std::vector<double>& theta_grid) {
  return chart.estimate_bounds(I_grid, theta_grid);
}

LemmaReport compute_chart_lemmas(const ActionAngleChart& chart, const std::vector<double>& h_grid,
                                 double tolerance) {
  if (h_grid.size() < 4) throw ConfigError("chart lemma verification needs at least four energies");
  const double span = *std::max_element(h_grid.begin(), h_grid.end()) / *std::min_element(h_grid.begin(), h_grid.end());
  if (span < 1e3 * (1 - 1e-9)) throw ConfigError("chart lemma h grid must span at least three decades");
  const int n = chart.params().n;
  LemmaReport report;
  std::vector<double> hs, Is, d1, d2, freq;
  for (double h : h_grid) {
    const double step = 1e-3 * h;
    const double i0 = chart.action_of_energy(h);
    const double ip = chart.action_of_energy(h + step);
    const double im = chart.action_of_energy(h - step);
    LemmaReport::Row row{h, i0, (ip - im) / (2 * step), (ip - 2 * i0 + im) / (step * step), 0.0};
    // h'(I) by central difference of the inverse map.
    const double di = 1e-4 * i0;
    row.dhdI = (chart.energy_of_action(i0 + di) - chart.energy_of_action(i0 - di)) / (2 * di);
    report.rows.push_back(row);
    hs.push_back(h);
    Is.push_back(i0);
    d1.push_back(row.dIdh);
    d2.push_back(std::abs(row.d2Idh2));
    freq.push_back(row.dhdI);
  }
  const double lemma = 0.5 + 1.0 / (2.0 * n + 2.0);
  report.action = fit_loglog(hs, Is, lemma, tolerance, "I(h)");
  report.action_rate = fit_loglog(hs, d1, lemma - 1.0, tolerance, "I'(h)");
  report.energy = fit_loglog(Is, hs, (2.0 * n + 2.0) / (n + 2.0), tolerance, "h(I)");
  report.frequency = fit_loglog(Is, freq, n / (n + 2.0), tolerance, "h'(I)");
  report.curvature_bound_exponent = -1.5 + 1.0 / (n + 1.0);
  report.curvature = fit_loglog(hs, d2, report.curvature_bound_exponent, tolerance, "|I''(h)|");
  for (std::size_t i = 0; i < hs.size(); ++i) {
    report.curvature_constant =
        std::max(report.curvature_constant, d2[i] * std::pow(hs[i], -report.curvature_bound_exponent));
  }
  report.passed = report.action.within_tolerance() && report.action_rate.within_tolerance() &&
                  report.energy.within_tolerance() && report.frequency.within_tolerance() &&
                  report.curvature.exponent_est <= report.curvature_bound_exponent + tolerance &&
                  std::isfinite(report.curvature_constant) && report.curvature_constant > 0.0;
  return report;
}

LemmaReport verify_chart_lemmas(const ActionAngleChart& chart, const std::vector<double>& h_grid,
                                double tolerance) {
  LemmaReport report = compute_chart_lemmas(chart, h_grid, tolerance);
  if (!report.passed) {
    std::ostringstream os;
    os << "chart lemma slopes out of tolerance: I " << report.action.exponent_est << ", I' "
       << report.action_rate.exponent_est << ", h " << report.energy.exponent_est << ", h' "
       << report.frequency.exponent_est << ", |I''| " << report.curvature.exponent_est;
    throw InvariantViolation(os.str());
  }
  return report;
}

}  // namespace duffing
