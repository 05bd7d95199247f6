#pragma once

#include <string>
#include <vector>

#include "platoon/dynamics.hpp"
#include "platoon/follower.hpp"
#include "platoon/formation.hpp"
#include "platoon/planner.hpp"

namespace platoon {

enum class PrimitiveKind { slow_down, cruise, lane_change, acc };

struct MotionPrimitive {
  PrimitiveKind kind = PrimitiveKind::cruise;
  double v_des = 0;      ///< desired speed (cruise, slow_down)
  double decel = 0;      ///< desired deceleration magnitude (slow_down)
  int lane = 1;          ///< target lane, 1-based (lane_change)
  double accel = 0;      ///< accel/decel magnitude bound, 0 = none (lane_change)
  std::string front_id;  ///< front vehicle (acc)
  double gap_des = 0;    ///< desired bumper-to-bumper distance (acc)
};

struct Trigger {
  enum class Kind { time, gap_ge, in_lane } kind = Kind::time;
  double at_time = 0;        ///< time trigger [s]
  std::string a, b;          ///< gap_ge: footprint gap between vehicles a and b
  double threshold = 0;      ///< gap_ge threshold [m]
  std::string vehicle;       ///< in_lane: watched vehicle
  int lane = 1;              ///< in_lane: 1-based lane
  double tol = 0.2;          ///< in_lane: lateral tolerance [m]
};

struct ScheduledPrimitive {
  Trigger trigger;
  MotionPrimitive primitive;
};

/// Per-vehicle primitive sequences. The first primitive of each vehicle
/// must trigger at t = 0; later primitives activate in order once their
/// trigger condition holds (sticky).
struct PrimitiveSchedule {
  std::vector<std::string> vehicle_ids;
  std::vector<std::vector<ScheduledPrimitive>> primitives;  // per vehicle
};

PrimitiveSchedule load_schedule(const std::string& path);

struct FleetSnapshot {
  const std::vector<std::string>* ids;
  const std::vector<VehicleParams>* params;
  const std::vector<VehicleState>* states;

  int index_of(const std::string& id) const;
};

/// One MPC step executing the active primitive: a tracking problem whose
/// reference window is synthesized from the primitive parameters and the
/// current fleet snapshot.
ControlInput primitive_step(const VehicleParams& params, const VehicleState& z,
                            const ControlInput& u_prev, const MotionPrimitive& primitive,
                            const FleetSnapshot& env, const RoadGeometry& road,
                            const FollowerConfig& cfg);

struct ScheduleRunResult {
  FleetTrajectory trajectory;  ///< d_min is zero: no avoidance is imposed
  std::vector<int> active_primitive_at_end;
  double min_pair_distance = std::numeric_limits<double>::infinity();
  double min_speed = std::numeric_limits<double>::infinity();
  bool ok = true;
  std::string message;
};

/// Simulate all vehicles stepping their active primitives for T steps. No
/// inter-vehicle avoidance constraint is imposed; the result carries a
/// post-hoc minimum-distance annotation instead.
ScheduleRunResult run_schedule(const PrimitiveSchedule& schedule,
                               const std::vector<std::string>& ids,
                               const std::vector<VehicleParams>& params,
                               const std::vector<VehicleState>& initial_states,
                               const RoadGeometry& road, const FollowerConfig& cfg, int T);

}  // namespace platoon
