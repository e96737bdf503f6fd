#include "duffing/config.hpp"

#include <cmath>
#include <cstdlib>

namespace duffing {

namespace {

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

}  // namespace

std::vector<double> ChartSettings::lemma_h_grid() const {
  std::vector<double> grid(static_cast<std::size_t>(lemma_h_count));
  const double a = std::log(lemma_h_lo), b = std::log(lemma_h_hi);
  for (int i = 0; i < lemma_h_count; ++i) grid[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (lemma_h_count - 1));
  return grid;
}

void RunConfig::validate() const {
  const EquationParams p = params();
  PotentialModel model = potential();
  schedule.validate(p);
  integrator.validate();
  if (chart.lemma_h_count < 4) throw ConfigError("lemma h grid needs at least 4 points");
  if (!(chart.lemma_h_hi / chart.lemma_h_lo >= 1e3)) throw ConfigError("lemma h grid must span 3 decades");
  if (!(chart.options.I_max > integrator.I_cap)) throw ConfigError("chart I_max must exceed I_cap");
  if (!(verify.sigma > 0.0 && verify.sigma < 1.0)) throw ConfigError("verify sigma must lie in (0, 1)");
  if (stability.iterations < 1 || stability.rotation_iterations < 2) throw ConfigError("stability iterations too small");
  if (!(stability.config.radius_factor > 1.0)) throw ConfigError("radius factor must exceed 1");
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    reject_unknown(j, {"equation", "potential", "schedule", "integrator", "chart", "verify", "stability", "output_dir",
                       "workers"},
                   "config");
    if (j.contains("equation")) {
      const auto& e = j.at("equation");
      reject_unknown(e, {"n", "m"}, "equation");
      read(e, "n", c.n);
      read(e, "m", c.m);
    }
    if (j.contains("potential")) {
      const auto& p = j.at("potential");
      reject_unknown(p, {"period", "cos_coeffs"}, "potential");
      read(p, "period", c.period);
      read(p, "cos_coeffs", c.cos_coeffs);
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      reject_unknown(s, {"tau", "tau_prime", "eta", "K_max", "I_0", "max_cycles", "sigma_override"}, "schedule");
      read(s, "tau", c.schedule.tau);
      read(s, "tau_prime", c.schedule.tau_prime);
      read(s, "eta", c.schedule.eta);
      read(s, "K_max", c.schedule.K_max);
      read(s, "I_0", c.schedule.I_0);
      read(s, "max_cycles", c.schedule.max_cycles);
      if (s.contains("sigma_override") && !s.at("sigma_override").is_null())
        c.schedule.sigma_override = s.at("sigma_override").get<double>();
    }
    if (j.contains("integrator")) {
      const auto& i = j.at("integrator");
      reject_unknown(i, {"rel_tol", "abs_tol", "max_step", "I_cap", "backend"}, "integrator");
      read(i, "rel_tol", c.integrator.rel_tol);
      read(i, "abs_tol", c.integrator.abs_tol);
      read(i, "max_step", c.integrator.max_step);
      read(i, "I_cap", c.integrator.I_cap);
      if (i.contains("backend")) c.integrator.backend = parse_backend(i.at("backend").get<std::string>());
    }
    if (j.contains("chart")) {
      const auto& ch = j.at("chart");
      reject_unknown(ch, {"I_min", "I_max", "nodes_per_decade", "certified_I_min", "lemma_h_lo", "lemma_h_hi",
                          "lemma_h_count", "lemma_tolerance", "bound_I_grid"},
                     "chart");
      read(ch, "I_min", c.chart.options.I_min);
      read(ch, "I_max", c.chart.options.I_max);
      read(ch, "nodes_per_decade", c.chart.options.nodes_per_decade);
      read(ch, "certified_I_min", c.chart.options.certified_I_min);
      read(ch, "lemma_h_lo", c.chart.lemma_h_lo);
      read(ch, "lemma_h_hi", c.chart.lemma_h_hi);
      read(ch, "lemma_h_count", c.chart.lemma_h_count);
      read(ch, "lemma_tolerance", c.chart.lemma_tolerance);
      read(ch, "bound_I_grid", c.chart.bound_I_grid);
    }
    if (j.contains("verify")) {
      const auto& v = j.at("verify");
      reject_unknown(v, {"sigma", "I0_grid", "exponent_tolerance", "cycle_time_tolerance", "min_r_squared",
                         "prefactor_I0", "prefactor_tolerance"},
                     "verify");
      read(v, "sigma", c.verify.sigma);
      read(v, "I0_grid", c.verify.I0_grid);
      read(v, "exponent_tolerance", c.verify.tolerances.exponent);
      read(v, "cycle_time_tolerance", c.verify.tolerances.cycle_time);
      read(v, "min_r_squared", c.verify.tolerances.min_r_squared);
      read(v, "prefactor_I0", c.verify.prefactor_I0);
      read(v, "prefactor_tolerance", c.verify.prefactor_tolerance);
    }
    if (j.contains("stability")) {
      const auto& s = j.at("stability");
      reject_unknown(s, {"amplitudes", "iterations", "rotation_amplitudes", "rotation_iterations", "find_subharmonic",
                         "subharmonic_tolerance", "radius_factor", "escape_radius", "rel_tol", "abs_tol",
                         "constant_forcing"},
                     "stability");
      read(s, "amplitudes", c.stability.amplitudes);
      read(s, "iterations", c.stability.iterations);
      read(s, "rotation_amplitudes", c.stability.rotation_amplitudes);
      read(s, "rotation_iterations", c.stability.rotation_iterations);
      read(s, "find_subharmonic", c.stability.find_subharmonic);
      read(s, "subharmonic_tolerance", c.stability.subharmonic_tolerance);
      read(s, "radius_factor", c.stability.config.radius_factor);
      read(s, "escape_radius", c.stability.config.escape_radius);
      read(s, "rel_tol", c.stability.config.integrator.rel_tol);
      read(s, "abs_tol", c.stability.config.integrator.abs_tol);
      if (s.contains("constant_forcing") && !s.at("constant_forcing").is_null())
        c.stability.constant_forcing = s.at("constant_forcing").get<double>();
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    read(j, "workers", c.workers);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  return {{"equation", {{"n", c.n}, {"m", c.m}}},
          {"potential", {{"period", c.period}, {"cos_coeffs", c.cos_coeffs}}},
          {"schedule",
           {{"tau", c.schedule.tau},
            {"tau_prime", c.schedule.tau_prime},
            {"eta", c.schedule.eta},
            {"K_max", c.schedule.K_max},
            {"I_0", c.schedule.I_0},
            {"max_cycles", c.schedule.max_cycles},
            {"sigma_override", c.schedule.sigma_override ? json(*c.schedule.sigma_override) : json(nullptr)}}},
          {"integrator",
           {{"rel_tol", c.integrator.rel_tol},
            {"abs_tol", c.integrator.abs_tol},
            {"max_step", std::isfinite(c.integrator.max_step) ? json(c.integrator.max_step) : json(nullptr)},
            {"I_cap", c.integrator.I_cap},
            {"backend", to_string(c.integrator.backend)}}},
          {"chart",
           {{"I_min", c.chart.options.I_min},
            {"I_max", c.chart.options.I_max},
            {"nodes_per_decade", c.chart.options.nodes_per_decade},
            {"certified_I_min", c.chart.options.certified_I_min},
            {"lemma_h_lo", c.chart.lemma_h_lo},
            {"lemma_h_hi", c.chart.lemma_h_hi},
            {"lemma_h_count", c.chart.lemma_h_count},
            {"lemma_tolerance", c.chart.lemma_tolerance},
            {"bound_I_grid", c.chart.bound_I_grid}}},
          {"verify",
           {{"sigma", c.verify.sigma},
            {"I0_grid", c.verify.I0_grid},
            {"exponent_tolerance", c.verify.tolerances.exponent},
            {"cycle_time_tolerance", c.verify.tolerances.cycle_time},
            {"min_r_squared", c.verify.tolerances.min_r_squared},
            {"prefactor_I0", c.verify.prefactor_I0},
            {"prefactor_tolerance", c.verify.prefactor_tolerance}}},
          {"stability",
           {{"amplitudes", c.stability.amplitudes},
            {"iterations", c.stability.iterations},
            {"rotation_amplitudes", c.stability.rotation_amplitudes},
            {"rotation_iterations", c.stability.rotation_iterations},
            {"find_subharmonic", c.stability.find_subharmonic},
            {"subharmonic_tolerance", c.stability.subharmonic_tolerance},
            {"radius_factor", c.stability.config.radius_factor},
            {"escape_radius", c.stability.config.escape_radius},
            {"rel_tol", c.stability.config.integrator.rel_tol},
            {"abs_tol", c.stability.config.integrator.abs_tol},
            {"constant_forcing",
             c.stability.constant_forcing ? json(*c.stability.constant_forcing) : json(nullptr)}}},
          {"output_dir", c.output_dir.string()},
          {"workers", c.workers}};
}

RunConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json(path)); }

void apply_environment(RunConfig& cfg) {
  if (const char* dir = std::getenv("DUFFING_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
}

}  // namespace duffing
