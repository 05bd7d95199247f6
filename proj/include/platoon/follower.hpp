#pragma once

#include <optional>
#include <string>
#include <vector>

#include "platoon/dynamics.hpp"
#include "platoon/planner.hpp"

namespace platoon {

struct FollowerConfig {
  int N = 10;
  double dt = 0.2;
  Eigen::Vector4d Qz = Eigen::Vector4d(1, 1, 10, 1);
  Eigen::Vector2d Qu = Eigen::Vector2d(1, 10);
  Eigen::Vector2d Qdu = Eigen::Vector2d(10, 100);
  Limits limits = Limits::defaults(0.2);
  double kkt_tol = 1e-6;
  int max_iter = 200;
};

/// Linear resampling of a state trajectory onto a new sampling time:
/// positions and speed interpolate linearly, the heading interpolates on
/// the circle.
std::vector<VehicleState> resample_states(const std::vector<VehicleState>& states, double src_dt,
                                          double dst_dt);

struct FollowStepResult {
  ControlInput u;
  bool ok = false;
  std::string message;
};

/// One path-follower MPC step: track the target window (clamped by holding
/// its last state) and return the first optimal input.
FollowStepResult follow_step(const VehicleParams& params, const VehicleState& z,
                             const ControlInput& u_prev,
                             const std::vector<VehicleState>& target_window,
                             const FollowerConfig& cfg);

struct FollowRunResult {
  std::vector<VehicleState> states;  ///< executed closed loop, t = 0..n
  std::vector<ControlInput> inputs;
  bool ok = true;
  int failed_step = -1;
  std::string message;
  double max_position_error = 0;  ///< vs. the resampled target
  double max_speed_error = 0;
};

/// Closed-loop execution of a stored target trajectory sampled at
/// target_dt. The target is resampled to the follower rate first.
FollowRunResult follow_run(const VehicleParams& params, const VehicleState& z0,
                           const ControlInput& u0, const std::vector<VehicleState>& target,
                           double target_dt, const FollowerConfig& cfg);

}  // namespace platoon
