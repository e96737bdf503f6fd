#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "duffing/construction.hpp"
#include "duffing/serialization.hpp"

namespace duffing {

struct ChartSettings {
  ChartOptions options;
  double lemma_h_lo = 1e2;
  double lemma_h_hi = 1e8;
  int lemma_h_count = 25;
  double lemma_tolerance = 0.02;
  std::vector<double> bound_I_grid{1e3, 1e4, 1e5, 1e6};

  std::vector<double> lemma_h_grid() const;
};

struct VerifySettings {
  double sigma = 0.5;
  std::vector<double> I0_grid{1e3, 1e4, 1e5, 1e6};
  LemmaTolerances tolerances;
  double prefactor_I0 = 1e5;
  double prefactor_tolerance = 0.1;
};

struct StabilitySettings {
  std::vector<double> amplitudes{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  long iterations = 10000;
  std::vector<double> rotation_amplitudes{0.2, 0.4, 0.6, 0.8, 1.0};
  long rotation_iterations = 2000;
  bool find_subharmonic = true;
  double subharmonic_tolerance = 1e-10;
  StabilityConfig config;
  /// When set, the scan runs on p == constant instead of a stored profile (control runs).
  std::optional<double> constant_forcing;
};

/// Everything a run needs; cross-field validity is checked by validate().
struct RunConfig {
  int n = 3;
  int m = 2;
  double period = 1.0;
  std::vector<double> cos_coeffs{1.5, 1.0};
  ScheduleParams schedule;
  IntegratorConfig integrator;
  ChartSettings chart;
  VerifySettings verify;
  StabilitySettings stability;
  std::filesystem::path output_dir = "out";
  unsigned workers = 0;

  EquationParams params() const { return EquationParams::make(n, m); }
  PotentialModel potential() const { return PotentialModel(params(), cos_coeffs, period); }
  void validate() const;
};

RunConfig config_from_json(const json& j);
json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

/// Applies DUFFING_OUTPUT_DIR when set.
void apply_environment(RunConfig& cfg);

}  // namespace duffing
