#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "duffing/config.hpp"
#include "duffing/errors.hpp"
#include "duffing/serialization.hpp"

using namespace duffing;
namespace fs = std::filesystem;

namespace {

const EquationParams kParams = EquationParams::make(3, 2);

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("duffing_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ForcingProfile random_profile(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ForcingProfile p;
  double t = 0.0;
  for (int d = 0; d < 20; ++d) {
    const double w = 1e-4 * (1.0 + unit(rng));
    const double plateau = 1e-3 * unit(rng);
    const double start = t + 1e-2 * unit(rng);
    const double low = 1.0 - 0.5 * unit(rng);
    p.replace_tail(start, {{start, start + w, SegmentKind::linear, 1.0, low},
                           {start + w, start + w + plateau, SegmentKind::constant, low, low},
                           {start + w + plateau, start + 2 * w + plateau, SegmentKind::linear, low, 1.0}});
    t = start + 2 * w + plateau;
  }
  return p;
}

}  // namespace

TEST_CASE("doubles survive text round trips bit for bit") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> bits;
  int checked = 0;
  while (checked < 20000) {
    const std::uint64_t b = bits(rng);
    double v;
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    REQUIRE(same_bits(parse_double(format_double(v)), v));
    ++checked;
  }
  for (double v : {0.0, -0.0, 1.0, 0.1, 1e-310, std::numeric_limits<double>::max(),
                   std::numeric_limits<double>::denorm_min()}) {
    CHECK(same_bits(parse_double(format_double(v)), v));
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK_THROWS_AS(parse_double("abc"), ConfigError);
  CHECK_THROWS_AS(parse_double("1.5x"), ConfigError);
}

TEST_CASE("profile and potential JSON round trips are exact") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const ForcingProfile p = random_profile(rng);
    const json j = profile_to_json(p);
    const ForcingProfile q = profile_from_json(json::parse(j.dump(2)));
    REQUIRE(q.segments().size() == p.segments().size());
    for (std::size_t i = 0; i < p.segments().size(); ++i) {
      const auto& a = p.segments()[i];
      const auto& b = q.segments()[i];
      REQUIRE(same_bits(a.t0, b.t0));
      REQUIRE(same_bits(a.t1, b.t1));
      REQUIRE(same_bits(a.v0, b.v0));
      REQUIRE(same_bits(a.v1, b.v1));
      REQUIRE(a.kind == b.kind);
    }
    REQUIRE(profile_to_json(q).dump() == j.dump());
  }
  json bad = profile_to_json(ForcingProfile());
  bad["segments"][0]["kind"] = "cubic";
  CHECK_THROWS_AS(profile_from_json(bad), ConfigError);

  const PotentialModel model(kParams, {1.5, 0.3, -0.2}, 2.0);
  const PotentialModel back = potential_from_json(potential_to_json(model));
  CHECK(back.cos_coeffs() == model.cos_coeffs());
  CHECK(back.period() == 2.0);
  CHECK(same_bits(back.G(3.7), model.G(3.7)));
  CHECK_THROWS_AS(potential_from_json(json{{"n", 3}}), ConfigError);
}

TEST_CASE("configuration round trip, unknown keys and environment") {
  RunConfig cfg;
  cfg.schedule.I_0 = 3e5;
  cfg.schedule.sigma_override = 0.25;
  cfg.integrator.backend = FlowBackend::angle_action;
  cfg.stability.constant_forcing = 0.75;
  cfg.stability.amplitudes = {0.01, 0.02};
  const json j = config_to_json(cfg);
  const RunConfig back = config_from_json(j);
  CHECK(config_to_json(back) == j);
  CHECK(back.schedule.I_0 == 3e5);
  CHECK(back.schedule.sigma_override == 0.25);
  CHECK(back.integrator.backend == FlowBackend::angle_action);
  CHECK(back.stability.constant_forcing == 0.75);

  json typo = j;
  typo["schedule"]["tau_prim"] = 4;
  CHECK_THROWS_AS(config_from_json(typo), ConfigError);
  json top = j;
  top["extra"] = 1;
  CHECK_THROWS_AS(config_from_json(top), ConfigError);
  json degrees = j;
  degrees["equation"]["n"] = 2;
  CHECK_THROWS_AS(config_from_json(degrees).validate(), ConfigError);

  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  const fs::path dir = scratch_dir("config");
  write_json(dir / "c.json", j);
  CHECK(config_to_json(load_config(dir / "c.json")) == j);

  RunConfig env_cfg;
  ::setenv("DUFFING_OUTPUT_DIR", "/tmp/elsewhere", 1);
  apply_environment(env_cfg);
  ::unsetenv("DUFFING_OUTPUT_DIR");
  CHECK(env_cfg.output_dir == "/tmp/elsewhere");
}

TEST_CASE("CSV writer and reader") {
  std::ostringstream os;
  {
    CsvWriter w(os, {"a", "b", "c"});
    w << 1.25 << 7L << std::string("x");
    w.end_row();
    w << 0.1 << 2 << std::string("y");
    w.end_row();
  }
  CHECK(os.str() == "a,b,c\n1.25,7,x\n0.1,2,y\n");
  const fs::path dir = scratch_dir("csv");
  write_text(dir / "t.csv", os.str());
  const CsvTable t = read_csv(dir / "t.csv");
  CHECK(t.header.size() == 3);
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[1][t.column("c")] == "y");
  CHECK_THROWS_AS(t.column("d"), ConfigError);
  write_text(dir / "ragged.csv", "a,b\n1\n");
  CHECK_THROWS_AS(read_csv(dir / "ragged.csv"), ConfigError);
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), ConfigError);
}

TEST_CASE("construction log files round trip and are deterministic") {
  const ActionAngleChart chart(PotentialModel::reference(kParams));
  ScheduleParams s;
  s.I_0 = 1e4;
  s.K_max = 1;
  const Construction c = build_profile(chart, s, IntegratorConfig{});
  REQUIRE(c.log.cycles.size() == 15);

  const fs::path a = scratch_dir("log_a"), b = scratch_dir("log_b");
  write_construction_log(a, c.log);
  write_construction_log(b, c.log);
  for (const char* name : {"cycles.csv", "stages.csv", "quarters.csv"}) {
    CHECK(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }

  const ConstructionLog back = read_construction_log(a);
  REQUIRE(back.cycles.size() == c.log.cycles.size());
  REQUIRE(back.stages.size() == c.log.stages.size());
  for (std::size_t i = 0; i < back.cycles.size(); ++i) {
    CHECK(same_bits(back.cycles[i].t[0], c.log.cycles[i].t[0]));
    CHECK(same_bits(back.cycles[i].I[0], c.log.cycles[i].I[0]));
    CHECK(same_bits(back.cycles[i].t[4], c.log.cycles[i].t[4]));
    CHECK(same_bits(back.cycles[i].I[4], c.log.cycles[i].I[4]));
    CHECK(back.cycles[i].stage == c.log.cycles[i].stage);
  }
  for (std::size_t k = 0; k < back.stages.size(); ++k) {
    CHECK(back.stages[k].j == c.log.stages[k].j);
    CHECK(same_bits(back.stages[k].T, c.log.stages[k].T));
    CHECK(same_bits(back.stages[k].I, c.log.stages[k].I));
  }
  CHECK(back.monotone());

  const json j = to_json(c.log);
  CHECK(j.dump() == to_json(c.log).dump());
  CHECK_THROWS_AS(read_construction_log(scratch_dir("log_empty")), ConfigError);
}
