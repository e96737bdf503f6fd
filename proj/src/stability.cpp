#include "duffing/stability.hpp"

#include <Eigen/LU>
#include <cmath>
#include <numbers>
#include <sstream>

#include "duffing/parallel.hpp"

namespace duffing {

namespace {

using Stepper3 = DormandPrince<double, 3>;

void check_escape(double x, double y, double escape_radius) {
  if (!(std::abs(x) <= escape_radius && std::abs(y) <= escape_radius)) {
    std::ostringstream os;
    os << "amplitude too large: trajectory left |x|, |y| <= " << escape_radius;
    throw DomainError(os.str());
  }
}

struct Winding {
  Eigen::Vector2d z;
  double w;
};

Winding iterate_with_winding(const Eigen::Vector2d& z, int q, const ForcingProfile& forcing,
                             const PotentialModel& model, const IntegratorConfig& cfg) {
  Eigen::Vector3d s(z[0], z[1], 0.0);
  for (int k = 0; k < q; ++k) s = poincare_step(s, forcing, model, cfg);
  return {{s[0], s[1]}, s[2]};
}

}  // namespace

Eigen::Vector3d poincare_step(const Eigen::Vector3d& zw, const ForcingProfile& forcing, const PotentialModel& model,
                              const IntegratorConfig& cfg, double escape_radius) {
  if (zw[0] == 0.0 && zw[1] == 0.0) return zw;
  Stepper3 dp(cfg.control());
  Eigen::Vector3d s = zw;
  const int k = model.params().forcing_power();
  constexpr double inv_two_pi = 0.5 / std::numbers::pi;
  for_each_piece(forcing, 0.0, 1.0, [&](double a, double b, const ForcingPiece& piece) {
    auto rhs = [&](double t, const Eigen::Vector3d& v) -> Eigen::Vector3d {
      const double f = -model.G1(v[0]) - piece(t) * ipow(v[0], k);
      const double r2 = v[0] * v[0] + v[1] * v[1];
      return {v[1], f, (v[1] * v[1] - v[0] * f) / r2 * inv_two_pi};
    };
    s = dp.integrate(rhs, a, s, b).y;
    check_escape(s[0], s[1], escape_radius);
    return true;
  });
  return s;
}

Eigen::Vector2d poincare_map(const Eigen::Vector2d& z, const ForcingProfile& forcing, const PotentialModel& model,
                             const IntegratorConfig& cfg, double escape_radius) {
  using Stepper2 = DormandPrince<double, 2>;
  Stepper2 dp(cfg.control());
  Eigen::Vector2d s = z;
  for_each_piece(forcing, 0.0, 1.0, [&](double a, double b, const ForcingPiece& piece) {
    auto rhs = [&](double t, const Eigen::Vector2d& v) -> Eigen::Vector2d { return phase_rhs(model, piece, t, v); };
    s = dp.integrate(rhs, a, s, b).y;
    check_escape(s[0], s[1], escape_radius);
    return true;
  });
  return s;
}

PoincareOrbit iterate_orbit(const Eigen::Vector2d& z0, long N, const ForcingProfile& forcing,
                            const PotentialModel& model, const IntegratorConfig& cfg, double stop_radius,
                            double escape_radius) {
  PoincareOrbit orbit;
  orbit.samples.reserve(static_cast<std::size_t>(N) + 1);
  orbit.winding.reserve(static_cast<std::size_t>(N) + 1);
  Eigen::Vector3d s(z0[0], z0[1], 0.0);
  orbit.samples.push_back(z0);
  orbit.winding.push_back(0.0);
  orbit.max_radius = z0.norm();
  for (long k = 0; k < N; ++k) {
    s = poincare_step(s, forcing, model, cfg, escape_radius);
    const Eigen::Vector2d z(s[0], s[1]);
    orbit.samples.push_back(z);
    orbit.winding.push_back(s[2]);
    orbit.max_radius = std::max(orbit.max_radius, z.norm());
    if (orbit.max_radius > stop_radius) {
      orbit.left_ball = true;
      break;
    }
  }
  const auto n = static_cast<double>(orbit.winding.size() - 1);
  orbit.rotation_estimate = n > 0 ? orbit.winding.back() / n : 0.0;
  return orbit;
}

RotationEstimate rotation_number(const PoincareOrbit& orbit) {
  if (orbit.samples.size() < 3 || orbit.winding.size() != orbit.samples.size())
    throw ConfigError("rotation number needs at least two iterates");
  const std::size_t N = orbit.samples.size() - 1;
  for (const auto& z : orbit.samples)
    if (z[0] == 0.0 && z[1] == 0.0) throw DomainError("orbit touches the origin: rotation undefined");
  RotationEstimate r;
  const std::size_t half = N / 2;
  r.rho = (orbit.winding[N] - orbit.winding[0]) / static_cast<double>(N);
  r.error = 1.0 / static_cast<double>(N);
  r.first_half = (orbit.winding[half] - orbit.winding[0]) / static_cast<double>(half);
  r.second_half = (orbit.winding[N] - orbit.winding[half]) / static_cast<double>(N - half);
  return r;
}

StabilityReport stability_scan(const ForcingProfile& forcing, const PotentialModel& model,
                               const std::vector<double>& amplitudes, long N, const StabilityConfig& cfg,
                               bool allow_nonpositive_mean) {
  StabilityReport rep;
  rep.mean_forcing = forcing.mean();
  rep.N = N;
  rep.radius_factor = cfg.radius_factor;
  if (!(rep.mean_forcing > 0.0) && !allow_nonpositive_mean) {
    std::ostringstream os;
    os << "mean forcing " << rep.mean_forcing << " is not positive";
    throw ConfigError(os.str());
  }
  rep.rows.resize(amplitudes.size());
  parallel_for(amplitudes.size(), cfg.workers, [&](std::size_t i) {
    StabilityRow& row = rep.rows[i];
    const double r = amplitudes[i];
    row.amplitude = r;
    if (r == 0.0) {
      row.iterations = N;
      return;
    }
    PoincareOrbit orbit;
    try {
      orbit = iterate_orbit({r, 0.0}, N, forcing, model, cfg.integrator, cfg.radius_factor * r, cfg.escape_radius);
    } catch (const DomainError&) {
      row.bounded = false;
      row.max_radius = std::numeric_limits<double>::infinity();
      row.ratio = row.max_radius;
      return;
    }
    row.iterations = static_cast<long>(orbit.samples.size()) - 1;
    row.max_radius = orbit.max_radius;
    row.ratio = orbit.max_radius / r;
    row.bounded = !orbit.left_ball;
    if (row.iterations >= 2) row.rotation = rotation_number(orbit);
  });
  rep.rotation_monotone = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (!rep.rows[i].bounded) ++rep.escapes;
    if (i > 0 && !(rep.rows[i].rotation.rho > rep.rows[i - 1].rotation.rho)) rep.rotation_monotone = false;
  }
  rep.all_bounded = rep.escapes == 0;
  return rep;
}

std::pair<int, int> lowest_order_rational(double lo, double hi, int max_q) {
  if (lo > hi) std::swap(lo, hi);
  for (int q = 1; q <= max_q; ++q) {
    const int p = static_cast<int>(std::floor(lo * q)) + 1;
    if (static_cast<double>(p) / q < hi) return {p, q};
  }
  return {0, 0};
}

Subharmonic find_subharmonic(const ForcingProfile& forcing, const PotentialModel& model, int p, int q, double r_lo,
                             double r_hi, const StabilityConfig& cfg, double tolerance) {
  Subharmonic out;
  out.p = p;
  out.q = q;
  if (q < 1) throw ConfigError("subharmonic order q must be at least 1");
  const IntegratorConfig& ic = cfg.integrator;
  const double target = static_cast<double>(p);
  auto point = [](double r, double phi) { return Eigen::Vector2d(r * std::cos(phi), r * std::sin(phi)); };
  auto winding_gap = [&](double r, double phi) {
    return iterate_with_winding(point(r, phi), q, forcing, model, ic).w - target;
  };

  // Radius on the ray at angle phi where q iterates wind exactly p times (twist makes it unique).
  auto radial_root = [&](double phi, double& r_out) {
    double a = r_lo, b = r_hi;
    double fa = winding_gap(a, phi), fb = winding_gap(b, phi);
    if (!(fa < 0.0 && fb > 0.0)) return false;
    for (int it = 0; it < 100 && b - a > 1e-14 * b; ++it) {
      double c = b - fb * (b - a) / (fb - fa);
      if (!(c > a && c < b)) c = 0.5 * (a + b);
      const double fc = winding_gap(c, phi);
      if (fc == 0.0) { a = b = c; break; }
      if (fc < 0.0) { a = c; fa = fc; fb *= 0.5; } else { b = c; fb = fc; fa *= 0.5; }
    }
    r_out = 0.5 * (a + b);
    return true;
  };
  auto radial_mismatch = [&](double phi, double& r) {
    if (!radial_root(phi, r)) return std::numeric_limits<double>::quiet_NaN();
    return iterate_with_winding(point(r, phi), q, forcing, model, ic).z.norm() - r;
  };

  // The equation is odd, so half a turn of rays covers every orbit up to z -> -z.
  constexpr int kRays = 24;
  std::vector<double> phis(kRays + 1), radii(kRays + 1), mismatch(kRays + 1);
  for (int j = 0; j <= kRays; ++j) {
    phis[j] = std::numbers::pi * j / kRays;
    mismatch[j] = radial_mismatch(phis[j], radii[j]);
  }
  int sign_change = -1;
  for (int j = 0; j < kRays; ++j) {
    if (std::isfinite(mismatch[j]) && std::isfinite(mismatch[j + 1]) && mismatch[j] * mismatch[j + 1] <= 0.0) {
      sign_change = j;
      break;
    }
  }
  if (sign_change < 0) {
    out.diagnostics = "radial mismatch does not change sign along the resonant curve";
    return out;
  }
  double a = phis[sign_change], b = phis[sign_change + 1];
  double fa = mismatch[sign_change];
  double r_seed = radii[sign_change];
  for (int it = 0; it < 12; ++it) {
    const double c = 0.5 * (a + b);
    double rc = r_seed;
    const double fc = radial_mismatch(c, rc);
    if (!std::isfinite(fc)) break;
    r_seed = rc;
    if ((fc < 0.0) == (fa < 0.0)) { a = c; fa = fc; } else { b = c; }
  }
  Eigen::Vector2d z = point(r_seed, 0.5 * (a + b));

  auto F = [&](const Eigen::Vector2d& v) -> Eigen::Vector2d {
    return iterate_with_winding(v, q, forcing, model, ic).z - v;
  };
  Eigen::Vector2d Fz = F(z);
  for (out.newton_iterations = 0; out.newton_iterations < 50 && Fz.norm() > tolerance; ++out.newton_iterations) {
    Eigen::Matrix2d J;
    const double h = 1e-7 * std::max(1e-3, z.norm());
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e[c] = h;
      J.col(c) = (F(z + e) - F(z - e)) / (2.0 * h);
    }
    const Eigen::Vector2d step = J.partialPivLu().solve(-Fz);
    double lambda = 1.0;
    Eigen::Vector2d trial = z + step;
    Eigen::Vector2d Ft = F(trial);
    while (Ft.norm() > Fz.norm() && lambda > 1e-4) {
      lambda *= 0.5;
      trial = z + lambda * step;
      Ft = F(trial);
    }
    if (Ft.norm() > Fz.norm()) break;
    z = trial;
    Fz = Ft;
  }
  out.z = z;
  out.residual = Fz.norm();
  const Winding w = iterate_with_winding(z, q, forcing, model, ic);
  out.rotation = w.w / q;
  out.orbit.push_back(z);
  Eigen::Vector2d v = z;
  out.min_divisor_gap = std::numeric_limits<double>::infinity();
  for (int d = 1; d < q; ++d) {
    v = poincare_map(v, forcing, model, ic);
    out.orbit.push_back(v);
    if (q % d == 0) out.min_divisor_gap = std::min(out.min_divisor_gap, (v - z).norm());
  }
  const bool minimal = q == 1 || out.min_divisor_gap > 1e-6;
  out.found = out.residual <= tolerance && minimal && std::abs(w.w - target) < 0.5;
  std::ostringstream os;
  os << "seed ray " << sign_change << ", residual " << out.residual << " after " << out.newton_iterations
     << " Newton steps";
  if (!minimal) os << "; orbit has a shorter period";
  out.diagnostics = os.str();
  return out;
}

Subharmonic find_lowest_subharmonic(const ForcingProfile& forcing, const PotentialModel& model,
                                    const StabilityReport& scan, const StabilityConfig& cfg, double tolerance) {
  Subharmonic none;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& row : scan.rows) {
    if (!row.bounded || row.iterations < 2) continue;
    lo = std::min(lo, row.rotation.rho);
    hi = std::max(hi, row.rotation.rho);
  }
  if (!(hi > lo)) {
    none.diagnostics = "rotation scan has no usable range";
    return none;
  }
  const auto [p, q] = lowest_order_rational(lo, hi);
  none.p = p;
  none.q = q;
  const double target = static_cast<double>(p) / q;
  for (std::size_t i = 0; i + 1 < scan.rows.size(); ++i) {
    const auto& a = scan.rows[i];
    const auto& b = scan.rows[i + 1];
    if (a.bounded && b.bounded && a.rotation.rho < target && b.rotation.rho > target)
      return find_subharmonic(forcing, model, p, q, a.amplitude, b.amplitude, cfg, tolerance);
  }
  none.diagnostics = "no pair of neighbouring amplitudes brackets the target rotation";
  return none;
}

double reversibility_error(const Eigen::Vector2d& z0, long N, const ForcingProfile& forcing,
                           const PotentialModel& model, const IntegratorConfig& cfg) {
  PhaseState s{0.0, z0[0], z0[1]};
  for (long k = 1; k <= N; ++k) s = integrate_xy(s, static_cast<double>(k), forcing, model, cfg);
  for (long k = N - 1; k >= 0; --k) s = integrate_xy(s, static_cast<double>(k), forcing, model, cfg);
  return std::hypot(s.x - z0[0], s.y - z0[1]);
}

}  // namespace duffing
