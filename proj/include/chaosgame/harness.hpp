#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chaosgame/cloud.hpp"
#include "chaosgame/constructions.hpp"
#include "chaosgame/ifs.hpp"
#include "chaosgame/metrics.hpp"
#include "chaosgame/words.hpp"

namespace chaosgame {

struct MapSpec {
  std::vector<double> matrix;  // row-major
  std::vector<double> offset;
  friend bool operator==(const MapSpec&, const MapSpec&) = default;
};

struct IfsSpec {
  std::string builtin;  // a named_ifs() name, or empty when maps are given
  std::size_t dim = 0;
  std::vector<MapSpec> maps;
  friend bool operator==(const IfsSpec&, const IfsSpec&) = default;
};

struct DriverSpec {
  std::string kind = "champernowne";  // champernowne | de_bruijn | example4 | random | slow | literal
  std::optional<double> z;
  std::optional<std::uint64_t> seed;
  std::string word;  // literal symbols, comma separated
  std::string psi;   // slow: rate function text
  int k_max = 3;
  std::uint64_t step_cap = 5'000'000;
  std::optional<double> ratio_target;
  friend bool operator==(const DriverSpec&, const DriverSpec&) = default;
};

struct SweepSpec {
  std::vector<Point> x0;
  // eps_m = a r^m for m in [m_lo, m_hi], or an explicit list.
  std::optional<double> a, r;
  int m_lo = 0, m_hi = -1;
  std::vector<double> eps;
  bool certify = false;
  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct CloudSpec {
  std::optional<double> resolution;
  std::optional<int> depth;
  std::uint64_t budget = kDefaultPointBudget;
  std::vector<Point> points;  // explicit fixture, used as-is
  friend bool operator==(const CloudSpec&, const CloudSpec&) = default;
};

struct DimensionSpec {
  double a = 0.0, r = 0.0;
  int m_lo = 0, m_hi = -1;
  bool enabled() const { return m_hi >= m_lo && a > 0.0; }
  friend bool operator==(const DimensionSpec&, const DimensionSpec&) = default;
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string name;
  std::uint64_t seed = 0;
  IfsSpec ifs;
  DriverSpec driver;
  SweepSpec sweep;
  CloudSpec cloud;
  std::uint64_t orbit_cap = kDefaultOrbitCap;
  DimensionSpec dimension;
  std::string output_dir;

  /// Eps schedule in sweep order.
  std::vector<double> eps_values() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses the plain-text config format described in the README. Collects
/// every violation and throws one ValidationError listing them all.
ExperimentConfig parse_config(std::string_view text);

/// Canonical text form; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Names of the shipped presets.
std::vector<std::string> preset_names();
std::string preset_text(std::string_view name);
ExperimentConfig preset(std::string_view name);

IfsSystem make_ifs(const IfsSpec& spec);
AttractorCloud make_cloud(const ExperimentConfig& config, const IfsSystem& ifs,
                          const std::optional<std::filesystem::path>& cache_dir = std::nullopt);
/// For kind "slow" the schedule must be supplied.
DriverStream make_driver(const ExperimentConfig& config, const IfsSystem& ifs,
                         const Schedule* schedule = nullptr);

struct KeyCheck {
  std::size_t checked = 0;
  std::size_t violations = 0;
};

struct RunReport {
  ExperimentConfig config;
  std::size_t cloud_points = 0;
  double cloud_resolution = 0.0;
  int cloud_depth = 0;
  std::string driver_id;
  std::vector<RecoveryRecord> records;
  std::vector<CoverEstimate> covers;  // one per eps, in sweep order
  std::optional<DimensionEstimate> dimension;
  std::optional<Schedule> schedule;
  KeyCheck key;
  std::vector<std::pair<std::string, double>> timings;  // phase, seconds
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides config output dir
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::uint64_t> cap;
  std::optional<std::uint64_t> seed;
  bool write_files = true;
};

/// Errors from a phase are rethrown as the same type with "phase: " prefixed.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes recovery.csv, cover.csv, dimension.csv, schedule.csv, gnuplot .dat
/// files and summary.txt. Timings are not written.
void write_report(const RunReport& report, const std::filesystem::path& dir);

std::string recovery_csv(const std::vector<RecoveryRecord>& records);
std::string cover_csv(const std::vector<CoverEstimate>& covers);
std::string dimension_csv(const DimensionEstimate& est);
std::string schedule_csv(const Schedule& schedule);

}  // namespace chaosgame
