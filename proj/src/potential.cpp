#include "duffing/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "duffing/errors.hpp"
#include "duffing/quadrature.hpp"

namespace duffing {

PotentialModel::PotentialModel(EquationParams params, std::vector<double> cos_coeffs, double period,
                               double table_extent)
    : params_(params), coeffs_(std::move(cos_coeffs)), period_(period) {
  if (coeffs_.empty()) throw ConfigError("cos_coeffs must contain at least c_0");
  if (!(period_ > 0.0) || !std::isfinite(period_)) throw ConfigError("period must be positive and finite");
  double spread = 0.0;
  for (std::size_t j = 0; j < coeffs_.size(); ++j) {
    if (!std::isfinite(coeffs_[j])) throw ConfigError("cos_coeffs must be finite");
    if (j > 0) spread += std::abs(coeffs_[j]);
    omegas_.push_back(2.0 * std::numbers::pi * static_cast<double>(j) / period_);
  }
  a_min_ = coeffs_[0] - spread;
  a_max_ = coeffs_[0] + spread;
  if (!(a_min_ > 0.0)) {
    std::ostringstream os;
    os << "a(x) positivity certificate failed: c_0 - sum|c_j| = " << a_min_ << " <= 0";
    throw ConfigError(os.str());
  }

  const std::size_t harmonics = std::max<std::size_t>(coeffs_.size() - 1, 1);
  panel_ = period_ / static_cast<double>(harmonics);
  if (!is_constant()) {
    const auto panels = static_cast<std::size_t>(std::ceil(table_extent / panel_));
    cumulative_.resize(panels + 1, 0.0);
    for (std::size_t k = 0; k < panels; ++k) {
      cumulative_[k + 1] = cumulative_[k] + integrate_panel(k * panel_, (k + 1) * panel_);
    }
  }
}

PotentialModel PotentialModel::reference(const EquationParams& params) {
  return PotentialModel(params, {1.5, 1.0}, 1.0);
}

PotentialModel PotentialModel::power_law(const EquationParams& params) {
  return PotentialModel(params, {1.0}, 1.0);
}

double PotentialModel::a(double x) const {
  double sum = coeffs_[0];
  for (std::size_t j = 1; j < coeffs_.size(); ++j) sum += coeffs_[j] * std::cos(omegas_[j] * x);
  return sum;
}

double PotentialModel::a_prime(double x) const {
  double sum = 0.0;
  for (std::size_t j = 1; j < coeffs_.size(); ++j) sum -= coeffs_[j] * omegas_[j] * std::sin(omegas_[j] * x);
  return sum;
}

double PotentialModel::integrate_panel(double lo, double hi) const {
  const int k = params_.potential_power();
  return GL16::instance().integrate([&](double s) { return a(s) * ipow(s, k); }, lo, hi);
}

double PotentialModel::G(double x) const {
  const double ax = std::abs(x);
  const int k = params_.potential_power() + 1;
  if (is_constant()) return coeffs_[0] * ipow(ax, k) / k;
  auto panel = static_cast<std::size_t>(ax / panel_);
  const std::size_t last = cumulative_.size() - 1;
  if (panel < last) return cumulative_[panel] + integrate_panel(panel * panel_, ax);
  // Beyond the table: keep accumulating whole panels.
  double sum = cumulative_[last];
  std::size_t j = last;
  for (; (j + 1) * panel_ <= ax; ++j) sum += integrate_panel(j * panel_, (j + 1) * panel_);
  return sum + integrate_panel(j * panel_, ax);
}

double PotentialModel::G1(double x) const { return a(x) * ipow(x, params_.potential_power()); }

double PotentialModel::G2(double x) const {
  const int k = params_.potential_power();
  return a_prime(x) * ipow(x, k) + k * a(x) * ipow(x, k - 1);
}

double PotentialModel::G_between(double lo, double hi) const {
  if (hi - lo <= panel_) return integrate_panel(lo, hi);
  return G(hi) - G(lo);
}

double eval_a(const PotentialModel& model, double x) { return model.a(x); }
double eval_G(const PotentialModel& model, double x) { return model.G(x); }
double eval_G1(const PotentialModel& model, double x) { return model.G1(x); }
double eval_G2(const PotentialModel& model, double x) { return model.G2(x); }

BoundReport check_growth_bounds(const PotentialModel& model, double x_lo, double x_hi,
                                std::size_t sample_count) {
  if (!(x_lo >= 1.0) || !(x_hi > x_lo) || sample_count < 2) {
    throw ConfigError("check_growth_bounds needs 1 <= x_lo < x_hi and at least two samples");
  }
  const int n = model.params().n;
  BoundReport report;
  report.ratios = {RatioBounds{"G/|x|^(2n+2)", 0, 0, true}, RatioBounds{"|G'|/|x|^(2n+1)", 0, 0, true},
                   RatioBounds{"|G''|/(|x|^(2n+1)+x^(2n))", 0, 0, false},
                   RatioBounds{"|G/G'|/|x|", 0, 0, true}, RatioBounds{"|G G''/G'^2|/(|x|+1)", 0, 0, false}};
  for (auto& r : report.ratios) {
    r.c_low = std::numeric_limits<double>::infinity();
    r.c_high = 0.0;
  }
  const double step = std::log(x_hi / x_lo) / static_cast<double>(sample_count - 1);
  for (std::size_t i = 0; i < sample_count; ++i) {
    const double mag = x_lo * std::exp(step * static_cast<double>(i));
    for (double x : {mag, -mag}) {
      const double ax = std::abs(x);
      const double g = model.G(x), g1 = model.G1(x), g2 = model.G2(x);
      const std::array<double, 5> values = {
          g / ipow(ax, 2 * n + 2),
          std::abs(g1) / ipow(ax, 2 * n + 1),
          std::abs(g2) / (ipow(ax, 2 * n + 1) + ipow(ax, 2 * n)),
          std::abs(g / g1) / ax,
          std::abs(g * g2 / (g1 * g1)) / (ax + 1.0),
      };
      for (std::size_t r = 0; r < values.size(); ++r) {
        auto& bound = report.ratios[r];
        const double v = values[r];
        if (!std::isfinite(v) || (bound.two_sided && !(v > 0.0))) {
          std::ostringstream os;
          os << bound.name << " = " << v << " at x = " << x;
          throw InvariantViolation(os.str());
        }
        bound.c_low = std::min(bound.c_low, v);
        bound.c_high = std::max(bound.c_high, v);
      }
      ++report.samples;
    }
  }
  return report;
}

}  // namespace duffing
