#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "duffing/analysis.hpp"
#include "duffing/stability.hpp"

namespace duffing {

using json = nlohmann::json;

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

json potential_to_json(const PotentialModel& model);
PotentialModel potential_from_json(const json& j);

json profile_to_json(const ForcingProfile& profile);
ForcingProfile profile_from_json(const json& j);

json to_json(const ScalingFit& fit);
json to_json(const LemmaReport& report);
json to_json(const ChartBounds& bounds);
json to_json(const ValidationReport& report);
json to_json(const QuarterLemmaReport& report);
json to_json(const PrefactorReport& report);
json to_json(const StageReport& report);
json to_json(const BlowupEstimate& estimate);
json to_json(const StabilityReport& report);
json to_json(const Subharmonic& orbit);
json to_json(const ConstructionLog& log);

/// Minimal CSV writer; doubles are written with format_double.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long>(v); }
  CsvWriter& operator<<(const std::string& v);
  void end_row();

 private:
  void sep();
  std::ostream& out_;
  bool first_ = true;
};

/// Parsed CSV: header plus rows of fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

/// cycles.csv (i,t_i,I_i,sigma), stages.csv (k,j_k,T_k,I_jk), quarters.csv (full cycle records).
void write_construction_log(const std::filesystem::path& dir, const ConstructionLog& log);
/// Rebuilds cycle boundaries and stages from cycles.csv and stages.csv.
ConstructionLog read_construction_log(const std::filesystem::path& dir);

void write_fits_csv(const std::filesystem::path& path, const std::vector<ScalingFit>& fits);
void write_lemma_csv(const std::filesystem::path& path, const LemmaReport& report);
void write_orbit_csv(const std::filesystem::path& path, const PoincareOrbit& orbit);
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectorySample>& samples);

}  // namespace duffing
