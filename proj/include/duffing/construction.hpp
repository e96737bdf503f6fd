#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "duffing/flow.hpp"

namespace duffing {

struct ScheduleParams {
  double tau = 2.0;         ///< jump base: sigma_k = tau^{-k}
  double tau_prime = 16.0;  ///< time-control base
  double eta = 1.0;         ///< ramp width I^{-eta}
  int K_max = 12;
  double I_0 = 1e6;
  long max_cycles = 0;  ///< optional hard cap on the number of cycles (0: none)
  /// Control mode: replaces every stage jump; 0 leaves p == 1.
  std::optional<double> sigma_override;

  void validate(const EquationParams& params) const;
};

/// One revolution of the construction. Index 0..4 of the arrays stand for the angles
/// i, i + 1/4, i + 1/2, i + 3/4, i + 1.
struct CycleRecord {
  long i = 0;
  int stage = 0;
  double sigma = 0.0;
  std::array<double, 5> t{};
  std::array<double, 5> I{};
  double ramp_width = 0.0;
  double quarter_estimate = 0.0;  ///< unforced quarter period at I_i
  double margin = 0.0;            ///< ramp_width / quarter_estimate; must stay below 1/2
  std::array<int, 2> anchor_iterations{};
  std::array<double, 2> anchors{};  ///< end times of the two up-ramps

  double gain() const { return I[4] - I[0]; }
  double duration() const { return t[4] - t[0]; }
};

/// Stage k (k = 0 is the initial state): j_k cycles done by time T_k with action I_{j_k}.
struct StageRecord {
  int k = 0;
  long j = 0;
  double T = 0.0;
  double I = 0.0;
  double sigma = 0.0;
};

enum class StopReason { stage_limit, escaped, schedule_exhausted, cycle_limit };
std::string to_string(StopReason reason);

struct ConstructionLog {
  std::vector<CycleRecord> cycles;
  std::vector<StageRecord> stages;
  StopReason stop = StopReason::stage_limit;
  bool escaped = false;

  /// Completed stages, excluding the initial record.
  int completed_stages() const { return stages.empty() ? 0 : static_cast<int>(stages.size()) - 1; }
  std::vector<double> stage_times() const;
  bool monotone() const;
};

/// Builds one revolution starting at `start` (angle an integer, profile == 1 from start.t on),
/// installing the down/plateau/up dip in both loss quarters. Returns the record and the end point.
CycleRecord build_cycle(const FlowPoint& start, long index, double sigma, double eta, const ActionAngleChart& chart,
                        const IntegratorConfig& cfg, ForcingProfile& profile, FlowPoint& end);

/// Thrown when a cycle fails inside build_profile; carries the log up to that point.
class ConstructionFailure : public Error {
 public:
  ConstructionFailure(const Error& cause, ConstructionLog log)
      : Error(cause.error_class(), cause.what()), log_(std::move(log)) {}
  const ConstructionLog& log() const { return log_; }

 private:
  ConstructionLog log_;
};

struct Construction {
  ForcingProfile profile;
  ConstructionLog log;
};

/// Runs stages k = 1..K_max from (I_0, theta = 0) at t = 0.
Construction build_profile(const ActionAngleChart& chart, const ScheduleParams& schedule, const IntegratorConfig& cfg);

/// Cycle count of stage k starting from action I: floor(tau'^{-k} I^{n/(n+2)}).
long stage_cycles(const EquationParams& params, const ScheduleParams& schedule, int k, double I);

}  // namespace duffing
