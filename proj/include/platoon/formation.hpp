#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "platoon/dynamics.hpp"

namespace platoon {

struct RoadGeometry {
  int n_lanes{3};
  double lane_width{3.7};

  /// Center of 1-based lane j; lane 1 is the right-most in travel direction.
  double lane_center(int j) const { return (j - 0.5) * lane_width; }
  int nearest_lane(double y) const;
};

/// Platoon pattern C(n_v, l, p). l marks occupied lanes; row j of p is
/// [d_shift, d_1, ..., d_{n_v-1}] in meters. Gaps d_k are bumper to bumper;
/// d_shift places the lane's front-most vehicle behind the front-most
/// vehicle of the reference (right-most occupied) lane, negative = ahead.
/// Trailing zero gaps mean unused slots.
struct PlatoonConfiguration {
  int n_v{1};
  std::vector<int> l;
  Eigen::MatrixXd p;  // n_lanes x n_v

  int n_lanes() const { return static_cast<int>(l.size()); }
  bool lane_occupied(int j) const { return j >= 1 && j <= n_lanes() && l[j - 1] != 0; }
  int lane_count(int j) const;
  int reference_lane() const;
  int total_vehicles() const;
  void validate() const;  // throws parse_error on malformed patterns
};

/// A configuration bound to the persistent vehicle ids occupying its slots,
/// listed in the canonical slot order produced by expand().
struct ConfiguredPlatoon {
  PlatoonConfiguration cfg;
  std::vector<std::string> vehicle_ids;
};

/// Slot coordinates of a configuration: x relative to the rear-most vehicle
/// of the reference lane, y at absolute lane centers. Output order is the
/// reference lane front to rear, then the remaining occupied lanes by
/// increasing lane index, each front to rear.
std::vector<Eigen::Vector2d> expand(const PlatoonConfiguration& cfg, const RoadGeometry& road,
                                    const VehicleParams& params);

/// Constant-speed longitudinal reference x(t+1) = x(t) + v_max dt, t = 0..T.
std::vector<double> integrate_ref(double x0, double v_max, int T, double dt);

struct ReferenceTrajectory {
  std::vector<VehicleState> states;  // t = 0..T
};

struct ReferenceSet {
  std::vector<std::string> ids;  ///< initial-configuration slot order
  std::vector<ReferenceTrajectory> trajectories;
  int switch_step = 0;  ///< floor(rho * T) of the first vehicle

  const ReferenceTrajectory& for_vehicle(const std::string& id) const;
};

/// Per-vehicle reference trajectories for a reconfiguration. The lateral
/// reference holds the initial lane center through step floor(rho*T) and the
/// final lane center afterwards; the longitudinal reference advances at
/// v_max from the initial slots and re-anchors on the final slots (shifted
/// for fleet-centroid continuity) after the switch. Headings are zero and
/// speeds are v_max throughout. x_offset translates the whole pattern.
ReferenceSet build_reference(const ConfiguredPlatoon& ci, const ConfiguredPlatoon& cf, double rho,
                             double v_max, int T, double dt, const RoadGeometry& road,
                             const VehicleParams& params, double x_offset = 0.0);

/// Same with one switch fraction per vehicle, in ci slot order.
ReferenceSet build_reference(const ConfiguredPlatoon& ci, const ConfiguredPlatoon& cf,
                             const std::vector<double>& rho, double v_max, int T, double dt,
                             const RoadGeometry& road, const VehicleParams& params,
                             double x_offset = 0.0);

}  // namespace platoon
