#pragma once

#include <optional>
#include <string>
#include <vector>

#include "platoon/dynamics.hpp"
#include "platoon/lookup.hpp"

namespace platoon {

/// Future plan shared by a surrounding (non-platoon) vehicle, time-aligned
/// to the platoon's t = 0 at maneuver start.
struct SharedPlan {
  std::string vehicle_id;
  double len = 4.5;
  double w = 1.8;
  std::vector<double> t;  ///< stamps [s], strictly increasing
  std::vector<VehicleState> states;
};

std::vector<SharedPlan> load_traffic(const std::string& path);

/// Plan states sampled on the maneuver grid k*dt, k = 0..T. Interpolates
/// within the covered range only; throws insufficient_horizon_error when
/// the plan ends before T*dt.
std::vector<VehicleState> sample_plan(const SharedPlan& plan, double dt, int T);

/// Step-indexed trajectory-pair collision check: true iff the two
/// footprints come closer than d_min at any common step. traj2 is truncated
/// to traj1's length and must be at least as long.
bool collision_check(const std::vector<VehicleState>& traj1, double len1, double w1,
                     const std::vector<VehicleState>& traj2, double len2, double w2,
                     double d_min);

struct DecisionResult {
  bool feasible = false;
  int index = -1;
  double rho = 0;
  const ManeuverEntry* entry = nullptr;
};

/// Scan the stored family in index order and return the first maneuver
/// whose vehicles all stay at least d_min away from every shared plan;
/// infeasible result when none qualifies. Intra-platoon separation is
/// guaranteed at table-build time and is not rechecked here.
DecisionResult decide(const ManeuverTable& table, const std::string& ci, const std::string& cf,
                      const std::vector<SharedPlan>& shared,
                      std::optional<double> d_min_override = std::nullopt);

}  // namespace platoon
