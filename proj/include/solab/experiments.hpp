#pragma once

// Experiment runners behind the command line: each subcommand reads a
// manifest, runs its sweep and returns checks, CSV tables and grid files.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "solab/currents.hpp"
#include "solab/manifest.hpp"

namespace solab {

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

struct RunReport {
  std::string subcommand;
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::vector<StageTime> stages;
  std::vector<std::pair<std::string, GridForm>> grids;
  std::vector<std::string> notes;

  bool passed() const;
  /// Check value <= threshold.
  void check_at_most(const std::string& name, double value, double threshold, std::string detail = {});
  void check_true(const std::string& name, bool ok, std::string detail = {});
};

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  double tolerance_scale = 1.0;
  int workers = 0;  // 0 keeps the OpenMP default
};

const std::vector<std::string>& subcommands();

/// Validates the manifest (ValidationError with field paths) and runs.
RunReport run_experiment(const std::string& subcommand, const Json& manifest, const RunOptions& opt = {});

/// Fixed-format number used in every CSV cell.
std::string format_number(double x);
std::string to_csv(const Table& t);
/// Report as JSON: checks, stage timings, notes, status.
Json report_json(const RunReport& r);
/// Writes <table>.csv per table, report.json and <grid>.grid into dir.
void write_outputs(const RunReport& r, const std::string& dir);

}  // namespace solab
