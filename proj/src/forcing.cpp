#include "duffing/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "duffing/errors.hpp"

namespace duffing {

double Segment::value(double t) const {
  if (kind == SegmentKind::constant) return v0;
  if (t <= t0) return v0;
  if (t >= t1) return v1;
  return v0 + (v1 - v0) * ((t - t0) / (t1 - t0));
}

ForcingProfile::ForcingProfile() : segments_{Segment{}} {}

ForcingProfile::ForcingProfile(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw ConfigError("forcing profile needs at least one segment");
}

ForcingProfile ForcingProfile::constant(double value) {
  return ForcingProfile({Segment{0.0, 1.0, SegmentKind::constant, value, value}});
}

std::size_t ForcingProfile::locate(double s) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                             [](double v, const Segment& seg) { return v < seg.t0; });
  if (it == segments_.begin()) return 0;
  return static_cast<std::size_t>(it - segments_.begin()) - 1;
}

double ForcingProfile::operator()(double t) const {
  const double s = t - std::floor(t);
  return segments_[locate(s)].value(s);
}

std::vector<double> ForcingProfile::breakpoints() const {
  std::vector<double> out;
  out.reserve(segments_.size() + 1);
  for (const auto& seg : segments_) out.push_back(seg.t0);
  out.push_back(1.0);
  return out;
}

double ForcingProfile::mean() const {
  double sum = 0.0;
  for (const auto& seg : segments_) sum += seg.integral();
  return sum;
}

double ForcingProfile::min_value() const {
  double v = segments_.front().v0;
  for (const auto& seg : segments_) v = std::min({v, seg.v0, seg.v1});
  return v;
}

double ForcingProfile::max_value() const {
  double v = segments_.front().v0;
  for (const auto& seg : segments_) v = std::max({v, seg.v0, seg.v1});
  return v;
}

double ForcingProfile::last_modified() const {
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    if (it->v0 != 1.0 || it->v1 != 1.0) return it->t1;
  }
  return 0.0;
}

void ForcingProfile::replace_tail(double t_from, const std::vector<Segment>& tail) {
  if (!(t_from >= 0.0 && t_from < 1.0)) throw ConfigError("replace_tail: start outside [0, 1)");
  const std::size_t i = locate(t_from);
  Segment& cut = segments_[i];
  const double at_cut = cut.value(t_from);
  std::vector<Segment> kept(segments_.begin(), segments_.begin() + static_cast<std::ptrdiff_t>(i));
  if (cut.t0 < t_from) {
    Segment head = cut;
    head.t1 = t_from;
    head.v1 = at_cut;
    kept.push_back(head);
  }
  double t = t_from;
  double v = at_cut;
  for (const auto& seg : tail) {
    if (seg.t0 != t) throw ConfigError("replace_tail: tail segments are not contiguous");
    if (seg.t1 > 1.0) throw InfeasibleError("forcing modification extends past the end of the period");
    v = seg.v1;
    t = seg.t1;
    kept.push_back(seg);
  }
  if (t < 1.0) kept.push_back(Segment{t, 1.0, SegmentKind::constant, v, v});
  segments_ = std::move(kept);
}

namespace {

void add_issue(ValidationReport& r, const std::string& invariant, double t, const std::string& detail) {
  r.valid = false;
  r.issues.push_back({invariant, t, detail});
}

}  // namespace

ValidationReport validate_profile(const ForcingProfile& profile, double tau, const std::vector<double>& stage_times,
                                  double trailing_from) {
  ValidationReport r;
  const auto& segs = profile.segments();
  r.min_value = profile.min_value();
  r.max_value = profile.max_value();
  r.mean = profile.mean();
  r.last_modified = profile.last_modified();

  if (segs.front().t0 != 0.0) add_issue(r, "tiling", segs.front().t0, "first segment does not start at 0");
  if (segs.back().t1 != 1.0) add_issue(r, "tiling", segs.back().t1, "last segment does not end at 1");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    if (!(s.t1 > s.t0)) add_issue(r, "tiling", s.t0, "empty or reversed segment");
    if (s.kind == SegmentKind::constant && s.v0 != s.v1)
      add_issue(r, "continuity", s.t0, "constant segment with distinct end values");
    if (i + 1 < segs.size()) {
      if (segs[i + 1].t0 != s.t1) {
        std::ostringstream os;
        os << "gap or overlap between " << s.t1 << " and " << segs[i + 1].t0;
        add_issue(r, "tiling", s.t1, os.str());
      }
      if (segs[i + 1].v0 != s.v1) {
        std::ostringstream os;
        os.precision(17);
        os << "jump from " << s.v1 << " to " << segs[i + 1].v0;
        add_issue(r, "continuity", s.t1, os.str());
      }
    }
  }
  if (segs.back().v1 != segs.front().v0) add_issue(r, "continuity", 1.0, "periodic wrap is discontinuous");

  const double floor_value = 1.0 - 1.0 / tau;
  for (const auto& s : segs) {
    for (double v : {s.v0, s.v1}) {
      if (v < floor_value || v > 1.0) {
        std::ostringstream os;
        os << "value " << v << " outside [" << floor_value << ", 1]";
        add_issue(r, "range", s.t0, os.str());
      }
    }
  }

  if (trailing_from >= 0.0 && r.last_modified > trailing_from)
    add_issue(r, "trailing", r.last_modified, "profile differs from 1 after the last modification");

  for (std::size_t k = 1; k < stage_times.size(); ++k) {
    StageOscillation st;
    st.k = static_cast<int>(k);
    st.T = stage_times[k];
    st.bound = std::pow(tau, -static_cast<double>(k));
    double lo = 1.0, hi = 1.0;
    for (const auto& s : segs) {
      if (s.t1 <= st.T) continue;
      lo = std::min({lo, s.value(std::max(s.t0, st.T)), s.v1});
      hi = std::max({hi, s.value(std::max(s.t0, st.T)), s.v1});
    }
    st.oscillation = hi - lo;
    if (st.oscillation > st.bound) {
      std::ostringstream os;
      os << "oscillation " << st.oscillation << " exceeds " << st.bound << " after T_" << k;
      add_issue(r, "oscillation", st.T, os.str());
    }
    r.stages.push_back(st);
  }
  return r;
}

}  // namespace duffing
