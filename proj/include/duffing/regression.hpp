#pragma once

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace duffing {

/// Least-squares line log(y) = intercept + exponent * log(x) with goodness-of-fit data.
struct ScalingFit {
  std::string quantity;
  double exponent_est = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double std_error = 0.0;  ///< standard error of the exponent
  std::vector<double> log_x;
  std::vector<double> log_y;

  double residual(std::size_t i) const { return log_y[i] - (intercept + exponent_est * log_x[i]); }
  bool within_tolerance() const { return std::abs(exponent_est - expected) <= tolerance; }
  /// Exponent within tolerance and r^2 >= min_r_squared.
  bool passed(double min_r_squared = 0.99) const { return within_tolerance() && r_squared >= min_r_squared; }
};

/// Ordinary least squares slope/intercept for y against x.
template <typename DerivedX, typename DerivedY>
void fit_line(const Eigen::ArrayBase<DerivedX>& x, const Eigen::ArrayBase<DerivedY>& y, double& slope,
              double& intercept, double& r_squared, double& slope_std_error) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Index count = x.size();
  const Scalar mx = x.mean();
  const Scalar my = y.mean();
  const auto dx = (x - mx).eval();
  const auto dy = (y - my).eval();
  const Scalar sxx = dx.square().sum();
  const Scalar sxy = (dx * dy).sum();
  const Scalar syy = dy.square().sum();
  slope = sxx > 0 ? sxy / sxx : Scalar(0);
  intercept = my - slope * mx;
  const Scalar ss_res = (dy - slope * dx).square().sum();
  r_squared = syy > 0 ? 1 - ss_res / syy : Scalar(1);
  slope_std_error = (count > 2 && sxx > 0) ? std::sqrt(ss_res / (count - 2) / sxx) : Scalar(0);
}

/// Log-log regression of y against x; both must be positive.
inline ScalingFit fit_loglog(std::span<const double> x, std::span<const double> y, double expected,
                             double tolerance, std::string quantity = {}) {
  ScalingFit fit;
  fit.quantity = std::move(quantity);
  fit.expected = expected;
  fit.tolerance = tolerance;
  const auto count = static_cast<Eigen::Index>(x.size());
  Eigen::ArrayXd lx(count), ly(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    lx(i) = std::log(x[static_cast<std::size_t>(i)]);
    ly(i) = std::log(y[static_cast<std::size_t>(i)]);
  }
  fit_line(lx, ly, fit.exponent_est, fit.intercept, fit.r_squared, fit.std_error);
  fit.log_x.assign(lx.begin(), lx.end());
  fit.log_y.assign(ly.begin(), ly.end());
  return fit;
}

}  // namespace duffing
