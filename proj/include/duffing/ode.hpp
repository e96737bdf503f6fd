#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "duffing/errors.hpp"

namespace duffing {

/// Step-size control knobs shared by every integration in the project.
struct StepControl {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
};

/// Terminal event: the first crossing of g(t, y) from negative to non-negative.
/// Crossings are bracketed within one accepted step and refined on the method's own
/// single-step map until the bracket is below `time_tol * max(1, |t|)`.
template <typename G>
struct RisingEvent {
  G g;
  double time_tol = 1e-13;
};

struct NoEvent {};

/// Embedded Dormand-Prince 5(4) with cubic Hermite dense output.
template <typename Scalar, int Dim>
class DormandPrince {
 public:
  using Vector = Eigen::Matrix<Scalar, Dim, 1>;

  struct Result {
    Scalar t;
    Vector y;
    bool event = false;
    long steps = 0;
  };

  explicit DormandPrince(StepControl control = {}) : control_(control) {}

  const StepControl& control() const { return control_; }
  /// Suggested size of the next step; carried across calls so restarts at breakpoints are cheap.
  Scalar step_hint() const { return hint_; }
  void set_step_hint(Scalar h) { hint_ = h; }

  /// Integrates a smooth right-hand side from (t0, y0) to t1 (either direction).
  template <typename Rhs>
  Result integrate(Rhs&& f, Scalar t0, const Vector& y0, Scalar t1) {
    NoEvent none;
    return run(f, t0, y0, t1, none);
  }

  /// As integrate, stopping at the first rising crossing of the event function.
  template <typename Rhs, typename G>
  Result integrate(Rhs&& f, Scalar t0, const Vector& y0, Scalar t1, RisingEvent<G>& event) {
    return run(f, t0, y0, t1, event);
  }

 private:
  struct Step {
    Vector y1, f1, err;
  };

  template <typename Rhs>
  Step attempt(Rhs& f, Scalar t, const Vector& y, const Vector& k1, Scalar h) const {
    const Vector k2 = f(t + h / 5, (y + h * (k1 / 5)).eval());
    const Vector k3 = f(t + 3 * h / 10, (y + h * (3 * k1 / 40 + 9 * k2 / 40)).eval());
    const Vector k4 = f(t + 4 * h / 5, (y + h * (44 * k1 / 45 - 56 * k2 / 15 + 32 * k3 / 9)).eval());
    const Vector k5 = f(t + 8 * h / 9, (y + h * (19372 * k1 / 6561 - 25360 * k2 / 2187 + 64448 * k3 / 6561 -
                                                 212 * k4 / 729)).eval());
    const Vector k6 = f(t + h, (y + h * (9017 * k1 / 3168 - 355 * k2 / 33 + 46732 * k3 / 5247 + 49 * k4 / 176 -
                                         5103 * k5 / 18656)).eval());
    Step s;
    s.y1 = y + h * (35 * k1 / 384 + 500 * k3 / 1113 + 125 * k4 / 192 - 2187 * k5 / 6784 + 11 * k6 / 84);
    s.f1 = f(t + h, s.y1);
    s.err = h * (71 * k1 / 57600 - 71 * k3 / 16695 + 71 * k4 / 1920 - 17253 * k5 / 339200 + 22 * k6 / 525 -
                 s.f1 / 40);
    return s;
  }

  Scalar error_norm(const Vector& y0, const Step& s) const {
    const auto scale = (control_.abs_tol + control_.rel_tol * y0.cwiseAbs().cwiseMax(s.y1.cwiseAbs()).array());
    return std::sqrt((s.err.array() / scale).square().mean());
  }

  template <typename Rhs>
  Scalar initial_step(Rhs& f, Scalar t, const Vector& y, const Vector& k1, Scalar span) const {
    const auto scale = (control_.abs_tol + control_.rel_tol * y.cwiseAbs().array()).eval();
    const Scalar d0 = std::sqrt((y.array() / scale).square().mean());
    const Scalar d1 = std::sqrt((k1.array() / scale).square().mean());
    Scalar h0 = (d0 < 1e-5 || d1 < 1e-5) ? Scalar(1e-6) : Scalar(0.01) * d0 / d1;
    h0 = std::min(h0, std::abs(span));
    const Vector y1 = y + h0 * (span > 0 ? 1 : -1) * k1;
    const Vector k2 = f(t + (span > 0 ? h0 : -h0), y1);
    const Scalar d2 = std::sqrt(((k2 - k1).array() / scale).square().mean()) / h0;
    const Scalar h1 = std::max(d1, d2) <= 1e-15 ? std::max(Scalar(1e-6), h0 * Scalar(1e-3))
                                                : std::pow(Scalar(0.01) / std::max(d1, d2), Scalar(0.2));
    // Not capped by the span: a sliver of a span must not become the hint for the next one.
    return std::min(100 * h0, h1);
  }

  template <typename Rhs, typename E>
  Result run(Rhs& f, Scalar t0, const Vector& y0, Scalar t1, E& event) {
    constexpr bool has_event = !std::is_same_v<E, NoEvent>;
    Result res{t0, y0, false, 0};
    if (t1 == t0) return res;
    const Scalar dir = t1 > t0 ? 1 : -1;
    Scalar t = t0;
    Vector y = y0;
    Vector k1 = f(t, y);
    Scalar h = hint_ > 0 ? hint_ : initial_step(f, t, y, k1, t1 - t0);
    h = std::min<Scalar>(h, control_.max_step);
    Scalar g_prev = 0;
    if constexpr (has_event) g_prev = event.g(t, y);
    bool rejected_last = false;
    while (dir * (t1 - t) > 0) {
      if (++res.steps > control_.max_steps) throw NumericalError("integrator exceeded max_steps");
      bool last = false;
      Scalar hh = h;
      if (hh >= std::abs(t1 - t) * (1 - 1e-12)) {
        hh = std::abs(t1 - t);
        last = true;
      }
      const Scalar min_step = 8 * std::numeric_limits<Scalar>::epsilon() * std::max<Scalar>(std::abs(t), 1e-300);
      if (hh < min_step && !last) {
        std::ostringstream os;
        os.precision(17);
        os << "step size underflow at t = " << t << " (step " << hh << ", target " << t1 << ")";
        throw NumericalError(os.str());
      }
      const Scalar t_next = last ? t1 : t + dir * hh;
      Step s = attempt(f, t, y, k1, t_next - t);
      const Scalar err = error_norm(y, s);
      if (!std::isfinite(err)) {
        if (!s.y1.allFinite() && hh < 1e-300) throw NumericalError("state overflow");
        h = hh / 10;
        rejected_last = true;
        continue;
      }
      if (err > 1) {
        h = hh * std::max<Scalar>(Scalar(0.2), Scalar(0.9) * std::pow(err, Scalar(-0.2)));
        rejected_last = true;
        continue;
      }
      if (!s.y1.allFinite()) throw NumericalError("state overflow");
      Scalar grow = err == 0 ? Scalar(5) : std::min<Scalar>(5, Scalar(0.9) * std::pow(err, Scalar(-0.2)));
      if (rejected_last) grow = std::min<Scalar>(grow, 1);
      rejected_last = false;

      if constexpr (has_event) {
        const Scalar g_new = event.g(t_next, s.y1);
        if (g_prev < 0 && g_new >= 0) {
          locate(f, event, t, y, k1, t_next, s, g_prev, g_new, res);
          hint_ = hh;
          return res;
        }
        g_prev = g_new;
      }
      t = t_next;
      y = s.y1;
      k1 = s.f1;
      if (!last) h = std::min<Scalar>(hh * grow, control_.max_step);
      else hint_ = std::min<Scalar>(std::max(hh, h), control_.max_step);
      if (!last) hint_ = h;
    }
    res.t = t1;
    res.y = y;
    return res;
  }

  template <typename Rhs, typename E>
  void locate(Rhs& f, E& event, Scalar ta, const Vector& ya, const Vector& fa, Scalar tb, const Step& sb,
              Scalar ga, Scalar gb, Result& res) const {
    // Cubic Hermite guess, then Illinois iterations on exact single steps from (ta, ya).
    const Scalar hstep = tb - ta;
    auto hermite = [&](Scalar s) -> Vector {
      const Scalar s2 = s * s, s3 = s2 * s;
      return (2 * s3 - 3 * s2 + 1) * ya + (s3 - 2 * s2 + s) * hstep * fa + (-2 * s3 + 3 * s2) * sb.y1 +
             (s3 - s2) * hstep * sb.f1;
    };
    Scalar lo = 0, hi = 1, glo = ga, ghi = gb;
    for (int i = 0; i < 40; ++i) {
      const Scalar mid = (lo + hi) / 2;
      const Scalar gm = event.g(ta + mid * hstep, hermite(mid));
      if (gm < 0) { lo = mid; glo = gm; } else { hi = mid; ghi = gm; }
    }
    Scalar guess = (lo + hi) / 2;
    Scalar a = ta, b = tb;
    Scalar fa_ = ga, fb_ = gb;
    Vector yb = sb.y1;
    Scalar best_t = tb;
    Vector best_y = sb.y1;
    Scalar best_g = gb;
    const Scalar tol = event.time_tol * std::max<Scalar>(1, std::abs(tb));
    int side = 0;
    Scalar trial = ta + guess * hstep;
    for (int iter = 0; iter < 100; ++iter) {
      const Vector yt = attempt(f, ta, ya, fa, trial - ta).y1;
      const Scalar gt = event.g(trial, yt);
      if (std::abs(gt) < std::abs(best_g) || (gt >= 0 && best_g < 0)) {
        best_t = trial; best_y = yt; best_g = gt;
      }
      if (gt < 0) {
        a = trial; fa_ = gt;
        if (side == -1) fb_ /= 2;
        side = -1;
      } else {
        b = trial; fb_ = gt; yb = yt;
        if (side == 1) fa_ /= 2;
        side = 1;
      }
      if (gt == 0 || std::abs(b - a) <= tol) break;
      trial = (a * fb_ - b * fa_) / (fb_ - fa_);
      if (!(trial > std::min(a, b) && trial < std::max(a, b))) trial = (a + b) / 2;
    }
    res.t = best_t;
    res.y = best_y;
    res.event = true;
    (void)glo; (void)ghi; (void)yb;
  }

  StepControl control_;
  Scalar hint_ = 0;
};

}  // namespace duffing
