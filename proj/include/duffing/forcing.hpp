#pragma once

#include <string>
#include <vector>

namespace duffing {

enum class SegmentKind { constant, linear };

/// One piece of a forcing profile on [t0, t1]. Constant pieces keep v0 == v1.
struct Segment {
  double t0 = 0.0;
  double t1 = 1.0;
  SegmentKind kind = SegmentKind::constant;
  double v0 = 1.0;
  double v1 = 1.0;

  double slope() const { return kind == SegmentKind::constant ? 0.0 : (v1 - v0) / (t1 - t0); }
  double value(double t) const;
  double integral() const { return 0.5 * (v0 + v1) * (t1 - t0); }
};

/// Continuous piecewise constant/linear forcing on [0, 1], extended 1-periodically.
class ForcingProfile {
 public:
  /// p == 1 on [0, 1].
  ForcingProfile();
  /// Segments are taken as given; call validate_profile to check them.
  explicit ForcingProfile(std::vector<Segment> segments);
  static ForcingProfile constant(double value);

  const std::vector<Segment>& segments() const { return segments_; }
  /// p(t) for any real t, using the periodic extension.
  double operator()(double t) const;
  /// Index of the segment containing the reduced time s in [0, 1]; right-continuous.
  std::size_t locate(double s) const;
  /// Segment start times in [0, 1) plus the closing 1.
  std::vector<double> breakpoints() const;
  /// Closed-form integral over one period.
  double mean() const;
  double min_value() const;
  double max_value() const;
  /// Largest t at which p differs from 1 on the left, or 0 when p == 1.
  double last_modified() const;

  /// Replaces the profile on [t_from, 1] by `tail` followed by p == 1 up to 1.
  /// The tail must start at t_from and be contiguous.
  void replace_tail(double t_from, const std::vector<Segment>& tail);

 private:
  std::vector<Segment> segments_;
};

struct ProfileIssue {
  std::string invariant;  ///< tiling, continuity, range, trailing, oscillation
  double t = 0.0;
  std::string detail;
};

/// Oscillation of p over segments reaching beyond T_k.
struct StageOscillation {
  int k = 0;
  double T = 0.0;
  double oscillation = 0.0;
  double bound = 0.0;
};

struct ValidationReport {
  bool valid = true;
  std::vector<ProfileIssue> issues;
  double min_value = 0.0;
  double max_value = 0.0;
  double mean = 0.0;
  double last_modified = 0.0;
  std::vector<StageOscillation> stages;
};

/// Checks tiling of [0, 1], exact junction continuity (including the periodic wrap),
/// range [1 - 1/tau, 1], p == 1 after `trailing_from`, and the stagewise oscillation bound
/// tau^{-k} on [T_k, 1] for the given stage times (stage_times[k] = T_k, k >= 1 used).
ValidationReport validate_profile(const ForcingProfile& profile, double tau = 2.0,
                                  const std::vector<double>& stage_times = {}, double trailing_from = -1.0);

}  // namespace duffing
