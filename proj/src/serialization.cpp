#include "duffing/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace duffing {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("not a number: '" + text + "'");
  return v;
}

json potential_to_json(const PotentialModel& model) {
  return {{"n", model.params().n},
          {"m", model.params().m},
          {"period", model.period()},
          {"cos_coeffs", model.cos_coeffs()}};
}

PotentialModel potential_from_json(const json& j) {
  try {
    const auto params = EquationParams::make(j.at("n").get<int>(), j.at("m").get<int>());
    return PotentialModel(params, j.at("cos_coeffs").get<std::vector<double>>(), j.value("period", 1.0));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed potential: ") + e.what());
  }
}

json profile_to_json(const ForcingProfile& profile) {
  json segs = json::array();
  for (const auto& s : profile.segments()) {
    segs.push_back({{"t0", s.t0},
                    {"t1", s.t1},
                    {"kind", s.kind == SegmentKind::constant ? "const" : "linear"},
                    {"v0", s.v0},
                    {"v1", s.v1}});
  }
  return {{"segments", segs}};
}

ForcingProfile profile_from_json(const json& j) {
  try {
    std::vector<Segment> segs;
    for (const auto& s : j.at("segments")) {
      const std::string kind = s.at("kind").get<std::string>();
      if (kind != "const" && kind != "linear") throw ConfigError("unknown segment kind '" + kind + "'");
      segs.push_back({s.at("t0").get<double>(), s.at("t1").get<double>(),
                      kind == "const" ? SegmentKind::constant : SegmentKind::linear, s.at("v0").get<double>(),
                      s.at("v1").get<double>()});
    }
    return ForcingProfile(std::move(segs));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed profile: ") + e.what());
  }
}

json to_json(const ScalingFit& fit) {
  return {{"quantity", fit.quantity},     {"exponent", fit.exponent_est}, {"expected", fit.expected},
          {"tolerance", fit.tolerance},   {"intercept", fit.intercept},   {"r_squared", fit.r_squared},
          {"std_error", fit.std_error},   {"passed", fit.passed()},       {"log_x", fit.log_x},
          {"log_y", fit.log_y}};
}

json to_json(const LemmaReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"h", row.h}, {"I", row.I}, {"dIdh", row.dIdh}, {"d2Idh2", row.d2Idh2}, {"dhdI", row.dhdI}});
  return {{"action", to_json(r.action)},
          {"action_rate", to_json(r.action_rate)},
          {"energy", to_json(r.energy)},
          {"frequency", to_json(r.frequency)},
          {"curvature", to_json(r.curvature)},
          {"curvature_bound_exponent", r.curvature_bound_exponent},
          {"curvature_constant", r.curvature_constant},
          {"passed", r.passed},
          {"rows", rows}};
}

json to_json(const ChartBounds& b) {
  return {{"B1", b.B1}, {"B2", b.B2}, {"B3", b.B3}, {"C1", b.C1}, {"C2", b.C2}, {"I_lo", b.I_lo}, {"I_hi", b.I_hi}};
}

json to_json(const ValidationReport& r) {
  json issues = json::array();
  for (const auto& i : r.issues) issues.push_back({{"invariant", i.invariant}, {"t", i.t}, {"detail", i.detail}});
  json stages = json::array();
  for (const auto& s : r.stages)
    stages.push_back({{"k", s.k}, {"T", s.T}, {"oscillation", s.oscillation}, {"bound", s.bound}});
  return {{"valid", r.valid},         {"issues", issues},
          {"min_value", r.min_value}, {"max_value", r.max_value},
          {"mean", r.mean},           {"last_modified", r.last_modified},
          {"stages", stages}};
}

json to_json(const QuarterLemmaReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"I0", s.I0},
                       {"durations", s.durations},
                       {"increments", s.increments},
                       {"cycle_time", s.cycle_time},
                       {"gain", s.gain},
                       {"sixteenth_window", s.sixteenth_window}});
  }
  json fits = json::array();
  for (const auto& f : r.fits) fits.push_back(to_json(f));
  return {{"sigma", r.sigma}, {"samples", samples}, {"fits", fits}, {"passed", r.passed}};
}

json to_json(const PrefactorReport& r) {
  return {{"I0", r.I0},
          {"sigma", r.sigma},
          {"loss_full", r.loss_full},
          {"loss_half", r.loss_half},
          {"gain_full", r.gain_full},
          {"observed_ratio", r.observed_ratio},
          {"expected_ratio", r.expected_ratio},
          {"relative_error", r.relative_error},
          {"passed", r.passed}};
}

json to_json(const StageReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"k", row.k},
                    {"I", row.I},
                    {"T", row.T},
                    {"dT", row.dT},
                    {"growth_ratio", row.growth_ratio},
                    {"time_ratio", row.time_ratio},
                    {"floor_ratio", row.floor_ratio},
                    {"loglog", row.loglog}});
  }
  return {{"rows", rows},
          {"growth_evaluable", r.growth_evaluable},
          {"floor_evaluable", r.floor_evaluable},
          {"c_growth", r.c_growth},
          {"c_time", r.c_time},
          {"c_floor", r.c_floor},
          {"l", r.l},
          {"loglog_slope", r.loglog_slope},
          {"log_l", std::log(r.l)},
          {"passed", r.passed},
          {"notes", r.notes}};
}

json to_json(const BlowupEstimate& e) {
  return {{"T_last", e.T_last},
          {"T_inf", e.T_inf},
          {"bound", e.bound},
          {"infinite_tail", e.infinite_tail},
          {"min_action_ratio", e.min_action_ratio},
          {"passed", e.passed},
          {"message", e.message}};
}

json to_json(const StabilityReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"amplitude", row.amplitude},
                    {"iterations", row.iterations},
                    {"max_radius", row.max_radius},
                    {"ratio", row.ratio},
                    {"bounded", row.bounded},
                    {"rotation", row.rotation.rho},
                    {"rotation_error", row.rotation.error},
                    {"rotation_first_half", row.rotation.first_half},
                    {"rotation_second_half", row.rotation.second_half}});
  }
  return {{"mean_forcing", r.mean_forcing},
          {"N", r.N},
          {"radius_factor", r.radius_factor},
          {"rows", rows},
          {"escapes", r.escapes},
          {"all_bounded", r.all_bounded},
          {"rotation_monotone", r.rotation_monotone}};
}

json to_json(const Subharmonic& s) {
  json orbit = json::array();
  for (const auto& z : s.orbit) orbit.push_back({z[0], z[1]});
  return {{"p", s.p},
          {"q", s.q},
          {"found", s.found},
          {"z", {s.z[0], s.z[1]}},
          {"residual", s.residual},
          {"rotation", s.rotation},
          {"min_divisor_gap", std::isfinite(s.min_divisor_gap) ? json(s.min_divisor_gap) : json(nullptr)},
          {"newton_iterations", s.newton_iterations},
          {"diagnostics", s.diagnostics},
          {"orbit", orbit}};
}

json to_json(const ConstructionLog& log) {
  json stages = json::array();
  for (const auto& s : log.stages)
    stages.push_back({{"k", s.k}, {"j", s.j}, {"T", s.T}, {"I", s.I}, {"sigma", s.sigma}});
  double max_margin = 0.0;
  for (const auto& c : log.cycles) max_margin = std::max(max_margin, c.margin);
  return {{"cycles", log.cycles.size()},
          {"stages", stages},
          {"stop", to_string(log.stop)},
          {"escaped", log.escaped},
          {"monotone", log.monotone()},
          {"max_ramp_margin", max_margin}};
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out) {
  for (const auto& h : header) *this << h;
  end_row();
}

void CsvWriter::sep() {
  if (!first_) out_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  sep();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ConfigError("CSV column '" + name + "' missing");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size()) throw ConfigError("ragged CSV row in " + path.string());
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) throw ConfigError(path.string() + " is empty");
  return table;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_construction_log(const std::filesystem::path& dir, const ConstructionLog& log) {
  std::filesystem::create_directories(dir);
  {
    std::ostringstream os;
    CsvWriter w(os, {"i", "t_i", "I_i", "sigma"});
    for (const auto& c : log.cycles) {
      w << c.i << c.t[0] << c.I[0] << c.sigma;
      w.end_row();
    }
    write_text(dir / "cycles.csv", os.str());
  }
  {
    std::ostringstream os;
    CsvWriter w(os, {"k", "j_k", "T_k", "I_jk"});
    for (const auto& s : log.stages) {
      w << s.k << s.j << s.T << s.I;
      w.end_row();
    }
    write_text(dir / "stages.csv", os.str());
  }
  {
    std::ostringstream os;
    CsvWriter w(os, {"i", "stage", "sigma", "t0", "t1", "t2", "t3", "t4", "I0", "I1", "I2", "I3", "I4",
                     "ramp_width", "margin", "anchor_q2", "anchor_q4"});
    for (const auto& c : log.cycles) {
      w << c.i << c.stage << c.sigma;
      for (double t : c.t) w << t;
      for (double I : c.I) w << I;
      w << c.ramp_width << c.margin << c.anchors[0] << c.anchors[1];
      w.end_row();
    }
    write_text(dir / "quarters.csv", os.str());
  }
}

ConstructionLog read_construction_log(const std::filesystem::path& dir) {
  ConstructionLog log;
  const CsvTable stages = read_csv(dir / "stages.csv");
  const CsvTable cycles = read_csv(dir / "cycles.csv");
  if (stages.rows.empty() || cycles.rows.empty()) throw ConfigError("construction log in " + dir.string() + " is empty");
  const auto ck = stages.column("k"), cj = stages.column("j_k"), cT = stages.column("T_k"), cI = stages.column("I_jk");
  for (const auto& row : stages.rows) {
    StageRecord s;
    s.k = std::stoi(row[ck]);
    s.j = std::stol(row[cj]);
    s.T = parse_double(row[cT]);
    s.I = parse_double(row[cI]);
    log.stages.push_back(s);
  }
  const auto ci = cycles.column("i"), ct = cycles.column("t_i"), cI2 = cycles.column("I_i"),
             cs = cycles.column("sigma");
  for (const auto& row : cycles.rows) {
    CycleRecord c;
    c.i = std::stol(row[ci]);
    c.t[0] = parse_double(row[ct]);
    c.I[0] = parse_double(row[cI2]);
    c.sigma = parse_double(row[cs]);
    log.cycles.push_back(c);
  }
  for (std::size_t n = 0; n < log.cycles.size(); ++n) {
    CycleRecord& c = log.cycles[n];
    if (n + 1 < log.cycles.size()) {
      c.t[4] = log.cycles[n + 1].t[0];
      c.I[4] = log.cycles[n + 1].I[0];
    } else {
      c.t[4] = log.stages.back().T;
      c.I[4] = log.stages.back().I;
    }
    c.stage = 1;
    for (std::size_t k = 1; k < log.stages.size(); ++k) {
      if (c.i < log.stages[k].j) {
        c.stage = log.stages[k].k;
        break;
      }
    }
  }
  return log;
}

void write_fits_csv(const std::filesystem::path& path, const std::vector<ScalingFit>& fits) {
  std::ostringstream os;
  CsvWriter w(os, {"quantity", "log_I0", "log_quantity", "residual"});
  for (const auto& f : fits) {
    for (std::size_t i = 0; i < f.log_x.size(); ++i) {
      w << f.quantity << f.log_x[i] << f.log_y[i] << f.residual(i);
      w.end_row();
    }
  }
  write_text(path, os.str());
}

void write_lemma_csv(const std::filesystem::path& path, const LemmaReport& report) {
  std::ostringstream os;
  CsvWriter w(os, {"h", "I", "dIdh", "d2Idh2"});
  for (const auto& r : report.rows) {
    w << r.h << r.I << r.dIdh << r.d2Idh2;
    w.end_row();
  }
  write_text(path, os.str());
}

void write_orbit_csv(const std::filesystem::path& path, const PoincareOrbit& orbit) {
  std::ostringstream os;
  CsvWriter w(os, {"k", "x", "y"});
  for (std::size_t k = 0; k < orbit.samples.size(); ++k) {
    w << static_cast<long>(k) << orbit.samples[k][0] << orbit.samples[k][1];
    w.end_row();
  }
  write_text(path, os.str());
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectorySample>& samples) {
  std::ostringstream os;
  CsvWriter w(os, {"t", "theta", "I", "x", "y", "p_of_t"});
  for (const auto& s : samples) {
    w << s.t << s.theta << s.I << s.x << s.y << s.p;
    w.end_row();
  }
  write_text(path, os.str());
}

}  // namespace duffing
