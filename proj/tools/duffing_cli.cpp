// Command-line driver: build-chart, construct, verify, stability, sweep.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "duffing/config.hpp"
#include "duffing/parallel.hpp"

namespace fs = std::filesystem;
using namespace duffing;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> output_dir;
  std::optional<unsigned> workers;
  std::optional<int> n, m;
  std::optional<std::vector<double>> coeffs;
  std::optional<double> period;
  std::optional<double> tau, tau_prime, eta, I0, sigma;
  std::optional<int> K_max;
  std::optional<long> max_cycles;
  std::optional<std::string> backend;
  std::optional<double> rel_tol, abs_tol, I_cap;
  std::optional<double> tolerance;
  std::optional<long> iterations;
  std::optional<std::vector<double>> amplitudes;
  std::optional<std::vector<double>> grid;
  std::optional<double> verify_sigma;
  std::optional<std::string> log_dir;
  std::optional<std::string> profile_path;
  std::optional<double> constant_forcing;
  bool no_subharmonic = false;
};

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config_path ? load_config(*o.config_path) : RunConfig{};
  apply_environment(cfg);
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.workers) cfg.workers = *o.workers;
  if (o.n) cfg.n = *o.n;
  if (o.m) cfg.m = *o.m;
  if (o.coeffs) cfg.cos_coeffs = *o.coeffs;
  if (o.period) cfg.period = *o.period;
  if (o.tau) cfg.schedule.tau = *o.tau;
  if (o.tau_prime) cfg.schedule.tau_prime = *o.tau_prime;
  if (o.eta) cfg.schedule.eta = *o.eta;
  if (o.I0) cfg.schedule.I_0 = *o.I0;
  if (o.K_max) cfg.schedule.K_max = *o.K_max;
  if (o.max_cycles) cfg.schedule.max_cycles = *o.max_cycles;
  if (o.sigma) cfg.schedule.sigma_override = *o.sigma;
  if (o.backend) cfg.integrator.backend = parse_backend(*o.backend);
  if (o.rel_tol) cfg.integrator.rel_tol = *o.rel_tol;
  if (o.abs_tol) cfg.integrator.abs_tol = *o.abs_tol;
  if (o.I_cap) cfg.integrator.I_cap = *o.I_cap;
  if (o.tolerance) cfg.verify.tolerances.exponent = *o.tolerance;
  if (o.iterations) cfg.stability.iterations = *o.iterations;
  if (o.amplitudes) cfg.stability.amplitudes = *o.amplitudes;
  if (o.grid) cfg.verify.I0_grid = *o.grid;
  if (o.verify_sigma) cfg.verify.sigma = *o.verify_sigma;
  if (o.constant_forcing) cfg.stability.constant_forcing = *o.constant_forcing;
  if (o.no_subharmonic) cfg.stability.find_subharmonic = false;
  cfg.stability.config.workers = cfg.workers;
  cfg.validate();
  return cfg;
}

ActionAngleChart make_chart(const RunConfig& cfg) { return ActionAngleChart(cfg.potential(), cfg.chart.options); }

/// Records the command, the resolved config and wall time next to the outputs.
class Manifest {
 public:
  Manifest(std::string command, const RunConfig& cfg)
      : command_(std::move(command)), cfg_(cfg), start_(std::chrono::steady_clock::now()) {}
  void output(const fs::path& p) { outputs_.push_back(p.filename().string()); }
  void write(int exit_code) const {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json j = {{"command", command_},
              {"version", kVersion},
              {"compiler", __VERSION__},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"config", config_to_json(cfg_)},
              {"outputs", outputs_},
              {"exit_code", exit_code},
              {"wall_time_s", wall}};
    write_json(cfg_.output_dir / ("manifest_" + command_ + ".json"), j);
  }

 private:
  std::string command_;
  const RunConfig& cfg_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

void emit(Manifest& man, const fs::path& path, const json& j) {
  write_json(path, j);
  man.output(path);
}

int cmd_build_chart(const RunConfig& cfg) {
  Manifest man("build-chart", cfg);
  const auto chart = make_chart(cfg);
  const LemmaReport rep = compute_chart_lemmas(chart, cfg.chart.lemma_h_grid(), cfg.chart.lemma_tolerance);
  std::vector<double> thetas(64);
  for (int i = 0; i < 64; ++i) thetas[static_cast<std::size_t>(i)] = i / 64.0;
  const ChartBounds bounds = chart.estimate_bounds(cfg.chart.bound_I_grid, thetas);
  const fs::path out = cfg.output_dir;
  emit(man, out / "potential.json", potential_to_json(chart.model()));
  emit(man, out / "chart_lemmas.json", to_json(rep));
  emit(man, out / "chart_bounds.json", to_json(bounds));
  write_lemma_csv(out / "chart_lemmas.csv", rep);
  man.output(out / "chart_lemmas.csv");
  emit(man, out / "chart.json",
       {{"potential", potential_to_json(chart.model())},
        {"I_min", chart.table_I_min()},
        {"I_max", chart.table_I_max()},
        {"nodes_per_decade", cfg.chart.options.nodes_per_decade},
        {"certified_I_min", cfg.chart.options.certified_I_min},
        {"bounds", to_json(bounds)}});
  for (const ScalingFit* f : {&rep.action, &rep.action_rate, &rep.energy, &rep.frequency})
    std::printf("%-12s slope %.4f (expected %.4f) %s\n", f->quantity.c_str(), f->exponent_est, f->expected,
                f->passed() ? "ok" : "FAIL");
  std::printf("curvature   slope %.4f <= %.4f, constant %.4g\n", rep.curvature.exponent_est,
              rep.curvature_bound_exponent, rep.curvature_constant);
  std::printf("bounds B1=%.4g B2=%.4g B3=%.4g C1=%.4g C2=%.4g\n", bounds.B1, bounds.B2, bounds.B3, bounds.C1, bounds.C2);
  const int code = rep.passed ? 0 : 3;
  man.write(code);
  return code;
}

int cmd_construct(const RunConfig& cfg) {
  Manifest man("construct", cfg);
  const auto chart = make_chart(cfg);
  const fs::path out = cfg.output_dir;
  Construction c;
  try {
    c = build_profile(chart, cfg.schedule, cfg.integrator);
  } catch (const ConstructionFailure& e) {
    write_construction_log(out, e.log());
    throw;
  }
  const double trailing = c.log.cycles.empty() ? 0.0 : c.log.cycles.back().anchors[1];
  const ValidationReport val = validate_profile(c.profile, cfg.schedule.tau, c.log.stage_times(), trailing);
  emit(man, out / "profile.json", profile_to_json(c.profile));
  write_construction_log(out, c.log);
  for (const char* f : {"cycles.csv", "stages.csv", "quarters.csv"}) man.output(out / f);

  const bool control = cfg.schedule.sigma_override && *cfg.schedule.sigma_override == 0.0;
  double max_rel_gain = 0.0;
  for (const auto& cy : c.log.cycles) max_rel_gain = std::max(max_rel_gain, std::abs(cy.gain()) / cy.I[0]);
  json summary = to_json(c.log);
  summary["validation"] = to_json(val);
  summary["control_mode"] = control;
  summary["max_relative_cycle_gain"] = max_rel_gain;
  emit(man, out / "construction.json", summary);

  std::printf("stop: %s after %zu cycles, %d stages\n", to_string(c.log.stop).c_str(), c.log.cycles.size(),
              c.log.completed_stages());
  for (const auto& s : c.log.stages) std::printf("  k=%d j=%ld T=%.10g I=%.6g\n", s.k, s.j, s.T, s.I);
  std::printf("profile %s, mean %.6f, range [%.6f, %.6f]\n", val.valid ? "valid" : "INVALID", val.mean, val.min_value,
              val.max_value);
  for (const auto& issue : val.issues) std::printf("  %s at t=%.17g: %s\n", issue.invariant.c_str(), issue.t, issue.detail.c_str());

  int code = 0;
  if (control) {
    std::printf("control mode: net gain per cycle at most %.3g relative\n", max_rel_gain);
    code = val.valid && c.profile.last_modified() == 0.0 ? 0 : 3;
  } else if (!val.valid || !c.log.monotone()) {
    std::printf("construction rejected: %s\n", val.valid ? "action not monotone" : "profile invalid");
    code = 3;
  }
  man.write(code);
  return code;
}

int cmd_verify(const RunConfig& cfg, const fs::path& log_dir) {
  Manifest man("verify", cfg);
  const ConstructionLog log = read_construction_log(log_dir);
  const auto chart = make_chart(cfg);
  const QuarterLemmaReport quarters =
      verify_quarter_lemmas(chart, cfg.verify.sigma, cfg.verify.I0_grid, cfg.integrator, cfg.schedule.eta,
                            cfg.verify.tolerances, cfg.workers);
  const PrefactorReport pref = compare_loss_prefactor(chart, cfg.verify.sigma, cfg.verify.prefactor_I0, cfg.integrator,
                                                      cfg.schedule.eta, cfg.verify.prefactor_tolerance);
  const StageReport stages = verify_stage_growth(log, cfg.schedule, cfg.params());
  const BlowupEstimate blow = estimate_blowup_time(log, cfg.schedule, stages);
  const fs::path out = cfg.output_dir;
  emit(man, out / "verify.json",
       {{"quarters", to_json(quarters)}, {"prefactor", to_json(pref)}, {"stages", to_json(stages)},
        {"blowup", to_json(blow)}});
  write_fits_csv(out / "fits.csv", quarters.fits);
  man.output(out / "fits.csv");

  for (const auto& f : quarters.fits)
    std::printf("%-18s slope %+.4f (expected %+.4f +- %.3f, r2 %.5f) %s\n", f.quantity.c_str(), f.exponent_est,
                f.expected, f.tolerance, f.r_squared, f.passed(cfg.verify.tolerances.min_r_squared) ? "ok" : "FAIL");
  std::printf("loss prefactor ratio %.4f (expected %.4f) %s\n", pref.observed_ratio, pref.expected_ratio,
              pref.passed ? "ok" : "FAIL");
  std::printf("stage growth c=%.4g c'=%.4g c''=%.4g %s\n", stages.c_growth, stages.c_time, stages.c_floor,
              stages.passed ? "ok" : "FAIL");
  for (const auto& note : stages.notes) std::printf("  note: %s\n", note.c_str());
  std::printf("blow-up: %s %s\n", blow.message.c_str(), blow.passed ? "ok" : "FAIL");
  const int code = quarters.passed && pref.passed && stages.passed && blow.passed ? 0 : 3;
  man.write(code);
  return code;
}

int cmd_stability(const RunConfig& cfg, const std::optional<std::string>& profile_path) {
  Manifest man("stability", cfg);
  ForcingProfile profile;
  if (cfg.stability.constant_forcing) {
    profile = ForcingProfile::constant(*cfg.stability.constant_forcing);
  } else {
    const fs::path path = profile_path ? fs::path(*profile_path) : cfg.output_dir / "profile.json";
    if (!fs::exists(path)) throw ConfigError("profile not found: " + path.string());
    profile = profile_from_json(read_json(path));
  }
  const PotentialModel model = cfg.potential();
  const bool control = cfg.stability.constant_forcing.has_value();
  std::printf("integral of p over one period: %.12g\n", profile.mean());
  const StabilityReport scan =
      stability_scan(profile, model, cfg.stability.amplitudes, cfg.stability.iterations, cfg.stability.config, control);
  for (const auto& r : scan.rows)
    std::printf("  r=%.4g max radius %.4g (x%.3f) %s\n", r.amplitude, r.max_radius, r.ratio,
                r.bounded ? "bounded" : "LEFT BALL");

  json j = {{"mean_forcing", profile.mean()}, {"scan", to_json(scan)}};
  if (!control || profile.mean() > 0.0) {
    const StabilityReport rot = stability_scan(profile, model, cfg.stability.rotation_amplitudes,
                                               cfg.stability.rotation_iterations, cfg.stability.config, control);
    for (const auto& r : rot.rows) std::printf("  rotation r=%.3g: %.6f\n", r.amplitude, r.rotation.rho);
    j["rotation_scan"] = to_json(rot);
    if (cfg.stability.find_subharmonic) {
      const Subharmonic sub =
          find_lowest_subharmonic(profile, model, rot, cfg.stability.config, cfg.stability.subharmonic_tolerance);
      std::printf("subharmonic %d/%d: %s (%s)\n", sub.p, sub.q, sub.found ? "found" : "not found",
                  sub.diagnostics.c_str());
      j["subharmonic"] = to_json(sub);
    }
  }
  emit(man, cfg.output_dir / "stability.json", j);
  const int code = scan.all_bounded ? 0 : 3;
  man.write(code);
  return code;
}

int cmd_sweep(const RunConfig& cfg) {
  Manifest man("sweep", cfg);
  const auto chart = make_chart(cfg);
  const auto& grid = cfg.verify.I0_grid;
  std::vector<QuarterSample> samples(grid.size());
  const fs::path dir = cfg.output_dir / "sweep";
  parallel_for(grid.size(), cfg.workers, [&](std::size_t i) {
    samples[i] = sample_cycle(chart, cfg.verify.sigma, grid[i], cfg.schedule.eta, cfg.integrator);
    QuarterLemmaReport one;
    one.sigma = cfg.verify.sigma;
    one.samples = {samples[i]};
    write_json(dir / ("point_" + format_double(grid[i]) + ".json"), to_json(one)["samples"][0]);
  });
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
  std::ostringstream os;
  CsvWriter w(os, {"I0", "t1", "gain", "d1", "d2", "d3", "d4", "dI1", "dI2", "dI3", "dI4", "sixteenth"});
  for (std::size_t i : order) {
    const auto& s = samples[i];
    w << s.I0 << s.cycle_time << s.gain;
    for (double d : s.durations) w << d;
    for (double d : s.increments) w << d;
    w << s.sixteenth_window;
    w.end_row();
    std::printf("I0=%-10.4g t1=%.6g gain=%.6g\n", s.I0, s.cycle_time, s.gain);
  }
  write_text(cfg.output_dir / "sweep.csv", os.str());
  man.output(cfg.output_dir / "sweep.csv");
  man.write(0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Escape construction and origin stability for x'' + a(x) x^{2n+1} + p(t) x^{2m+1} = 0"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  Overrides o;
  app.add_option("--config", o.config_path, "JSON config file");
  app.add_option("--output-dir", o.output_dir, "output directory (overrides DUFFING_OUTPUT_DIR)");
  app.add_option("--workers", o.workers, "worker threads (0: hardware concurrency)");
  app.add_option("--n", o.n, "potential degree index");
  app.add_option("--m", o.m, "forcing degree index");
  app.add_option("--coeffs", o.coeffs, "cosine coefficients of a(x)")->delimiter(',');
  app.add_option("--period", o.period, "period of a(x)");
  app.add_option("--tau", o.tau, "jump base");
  app.add_option("--tau-prime", o.tau_prime, "time-control base");
  app.add_option("--eta", o.eta, "ramp width exponent");
  app.add_option("--I0", o.I0, "initial action");
  app.add_option("--K-max", o.K_max, "stage cap");
  app.add_option("--max-cycles", o.max_cycles, "cycle cap (0: none)");
  app.add_option("--sigma", o.sigma, "override every stage jump (0: control run with p == 1)");
  app.add_option("--backend", o.backend, "phase_plane or angle_action");
  app.add_option("--rel-tol", o.rel_tol, "integrator relative tolerance");
  app.add_option("--abs-tol", o.abs_tol, "integrator absolute tolerance");
  app.add_option("--I-cap", o.I_cap, "action treated as escape");

  auto* chart_cmd = app.add_subcommand("build-chart", "build the action-angle chart and check its scaling laws");
  auto* construct_cmd = app.add_subcommand("construct", "build the escaping forcing profile");
  auto* verify_cmd = app.add_subcommand("verify", "fit quarter/cycle exponents and stage growth");
  verify_cmd->add_option("--log-dir", o.log_dir, "directory holding cycles.csv and stages.csv");
  verify_cmd->add_option("--tolerance", o.tolerance, "exponent tolerance");
  verify_cmd->add_option("--grid", o.grid, "I0 grid")->delimiter(',');
  verify_cmd->add_option("--jump", o.verify_sigma, "jump used for the isolated-cycle fits");
  auto* stability_cmd = app.add_subcommand("stability", "iterate the time-1 map near the origin");
  stability_cmd->add_option("--profile", o.profile_path, "profile JSON (default: <output-dir>/profile.json)");
  stability_cmd->add_option("--iterations", o.iterations, "iterations per orbit");
  stability_cmd->add_option("--amplitudes", o.amplitudes, "starting amplitudes")->delimiter(',');
  stability_cmd->add_option("--constant-forcing", o.constant_forcing, "use p == value instead of a profile");
  stability_cmd->add_flag("--no-subharmonic", o.no_subharmonic, "skip the subharmonic search");
  auto* sweep_cmd = app.add_subcommand("sweep", "isolated cycles over an I0 grid");
  sweep_cmd->add_option("--grid", o.grid, "I0 grid")->delimiter(',');
  sweep_cmd->add_option("--jump", o.verify_sigma, "jump of the isolated cycles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorClass::config);
  }

  try {
    const RunConfig cfg = resolve(o);
    if (*chart_cmd) return cmd_build_chart(cfg);
    if (*construct_cmd) return cmd_construct(cfg);
    if (*verify_cmd) return cmd_verify(cfg, o.log_dir ? fs::path(*o.log_dir) : cfg.output_dir);
    if (*stability_cmd) return cmd_stability(cfg, o.profile_path);
    if (*sweep_cmd) return cmd_sweep(cfg);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(ErrorClass::config);
  }
  return 0;
}
