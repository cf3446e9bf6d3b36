#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfgp/config.hpp"
#include "qfgp/geometric_phase.hpp"
#include "qfgp/kernel.hpp"
#include "qfgp/master_equation.hpp"
#include "qfgp/sweep.hpp"

namespace qfgp {

/// Everything needed to re-run a computation, stamped on every output file.
struct Provenance {
  std::string command;
  RunConfig config;
  double wall_time_s = 0.0;
  /// Extra "key: value" header lines (fit results, calibration, ...).
  std::vector<std::pair<std::string, std::string>> notes;
};

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// %.17g, C locale.
std::string format_number(double x);

/// '#'-prefixed header lines ending with the embedded canonical config.
std::string provenance_header(const Provenance& p);
nlohmann::json provenance_json(const Provenance& p);

std::string csv_text(const Provenance& p, const Table& t);
nlohmann::json json_document(const Provenance& p, const Table& t);

/// Writes `<stem>.csv` and/or `<stem>.json` into the configured output
/// directory according to the output formats. Returns the files written.
std::vector<std::filesystem::path> write_outputs(const Provenance& p, const std::string& stem,
                                                 const Table& t);

/// The data section of a CSV file: everything after the '#' header lines.
std::string data_section(const std::string& csv);
/// The embedded config of a CSV file written by csv_text.
std::string embedded_config(const std::string& csv);

Table kernel_table(const KernelTable& k);
Table trajectory_table(const Trajectory& traj, int stride = 1);
Table phase_table(const PhaseSeries& s);
/// One row per point (all_cycles = false: last cycle only) or per (point, N).
/// Axis coordinates come first; failed points are omitted.
Table sweep_table(const SweepResult& r, bool all_cycles);

}  // namespace qfgp
