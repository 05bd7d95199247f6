#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "platoon/dynamics.hpp"
#include "platoon/follower.hpp"
#include "platoon/formation.hpp"
#include "platoon/planner.hpp"

namespace platoon {

/// Per-second input-rate bounds as written in scenario files; scaled by the
/// sampling time of whichever controller consumes them.
struct RateLimits {
  Eigen::Vector4d z_min;
  Eigen::Vector4d z_max;
  Eigen::Vector2d u_min;
  Eigen::Vector2d u_max;
  Eigen::Vector2d du_per_s_min;
  Eigen::Vector2d du_per_s_max;

  static RateLimits defaults();
  Limits at_dt(double dt) const;
};

struct Scenario {
  RoadGeometry road;
  std::vector<std::string> vehicle_ids;
  std::vector<VehicleParams> params;
  std::vector<VehicleState> initial_states;
  RateLimits limits;
  PlannerConfig planner;
  FollowerConfig follower;
  bool has_follower = false;
  std::map<std::string, ConfiguredPlatoon> configurations;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<double> rho_grid;
  std::vector<OrientedPolytope> obstacles;
  std::string traffic_path;

  PlanningScene scene() const;
  const ConfiguredPlatoon& configuration(const std::string& name) const;
};

Scenario load_scenario(const std::string& path);

}  // namespace platoon
