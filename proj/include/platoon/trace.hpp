#pragma once

#include <map>
#include <string>
#include <vector>

#include "platoon/planner.hpp"

namespace platoon {

struct TraceRow {
  double t = 0;
  std::string vehicle_id;
  double x = 0, y = 0, psi = 0, v = 0, a = 0, delta = 0;
};

/// Rows in time-major order: t, vehicle_id, x, y, psi, v, a, delta. The
/// terminal state row carries zero inputs (none is applied at t = T).
std::vector<TraceRow> trace_rows(const FleetTrajectory& traj);

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(const std::string& path);

/// Per-quantity CSVs (x, y, psi, v, a, delta against t, one column per
/// vehicle) for external plotting.
void write_plot_data(const std::string& dir, const std::string& prefix,
                     const FleetTrajectory& traj);

struct TraceAuditOptions {
  double d_min = 0;
  std::map<std::string, VehicleParams> dims;  ///< per vehicle; missing ids use fallback
  VehicleParams fallback;
  std::vector<OrientedPolytope> obstacles;
};

struct TraceAuditResult {
  bool passed = true;
  double min_pair_distance = std::numeric_limits<double>::infinity();
  double min_obstacle_distance = std::numeric_limits<double>::infinity();
  std::vector<std::string> violations;  ///< "(t, pair, dist)" entries
};

/// Recompute pairwise and obstacle footprint distances for every time group
/// of the trace and report sub-d_min events.
TraceAuditResult audit_trace(const std::vector<TraceRow>& rows, const TraceAuditOptions& options);

}  // namespace platoon
