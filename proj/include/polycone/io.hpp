#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "polycone/sim.hpp"

namespace polycone {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr int kLogFormatVersion = 1;

// --- scenario files (YAML) ---------------------------------------------------

/// Parses a scenario document. Unknown keys and malformed values raise
/// Error(ParseError) with a 1-based line number in the message.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string emit_scenario(const Scenario& scenario);

// --- trajectory logs (CSV) -----------------------------------------------------
//
// Leading "# key value" lines carry run metadata and obstacle geometry; then a
// header row and one row per step. Column order:
//   t, <state>, ref_<j>, u_<j>, min_clearance, fallback, zero_gradient,
//   then per obstacle i: h_<i>, psi_<i>, active_<i>, cx_<i>, cy_<i>, cz_<i>
// State columns: unicycle x,y,theta,v,omega; pointmass x,y,vx,vy; quadrotor
// x,y,z,vx,vy,vz,roll,pitch,yaw,p,q,r.

std::vector<std::string> state_columns(ModelKind model);
void write_log_csv(std::ostream& out, const TrajectoryLog& log);
TrajectoryLog read_log_csv(std::istream& in);
void save_log_csv(const std::string& path, const TrajectoryLog& log);
TrajectoryLog load_log_csv(const std::string& path);

// --- run summary (JSON) ----------------------------------------------------------

struct LatencyStats {
  double mean_us = 0.0;
  double p99_us = 0.0;
  double max_us = 0.0;
};
LatencyStats latency_stats(const std::vector<double>& seconds);

/// Terminal status, min clearance, min h, mean |u* - reference|, filter latency
/// and counters for fallback / zero-gradient / minimal-intervention violations.
nlohmann::json run_summary(const TrajectoryLog& log);

/// Steps with every kept psi >= 0 whose u* differs from the reference.
std::size_t minimal_intervention_violations(const TrajectoryLog& log);

// --- plotting ------------------------------------------------------------------

/// Top-down trajectory with obstacle outlines and the circular baseline's
/// virtual obstacles (dotted), plus a time-series panel of min h and min psi.
/// Throws InvalidArgument on an empty log.
std::string render_svg(const TrajectoryLog& log);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

/// Process exit code for a terminal status: reached 0, collided 2,
/// filter-failure 3, timeout 4.
int exit_code(TerminalStatus status);

}  // namespace polycone
