#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "platoon/dynamics.hpp"
#include "platoon/formation.hpp"
#include "platoon/geometry.hpp"
#include "platoon/nlp.hpp"

namespace platoon {

struct PlannerConfig {
  int N = 5;        ///< horizon steps
  double dt = 0.2;  ///< sampling time [s]
  int T = 120;      ///< maneuver length in steps
  double d_min = 0.3;
  double v_max = 20.0;
  double rho = 0.25;
  Eigen::Vector4d Qz = Eigen::Vector4d(1, 1, 10, 1);
  Eigen::Vector2d Qu = Eigen::Vector2d(1, 10);
  Eigen::Vector2d Qdu = Eigen::Vector2d(10, 100);
  Limits limits = Limits::defaults(0.2);
  double kkt_tol = 1e-6;
  int max_iter = 300;
};

struct VehicleTrajectory {
  std::string id;
  VehicleParams params;
  std::vector<VehicleState> states;  ///< t = 0..T
  std::vector<ControlInput> inputs;  ///< t = 0..T-1
  double rho = 0.5;
};

/// Closed-loop fleet trajectories plus the data needed to audit and execute
/// them. States always satisfy the model recursion exactly under the stored
/// inputs.
struct FleetTrajectory {
  std::vector<VehicleTrajectory> vehicles;
  double rho = 0.5;
  double d_min = 0;
  double dt = 0;
  double v_max = 0;
  std::string ci_id;
  std::string cf_id;
  std::vector<OrientedPolytope> obstacles;

  int horizon() const
  {
    return vehicles.empty() ? 0 : static_cast<int>(vehicles.front().states.size()) - 1;
  }
  const VehicleTrajectory& vehicle(const std::string& id) const;
};

/// Inputs of one receding-horizon window.
struct FtcocInputs {
  std::vector<VehicleParams> params;
  std::vector<VehicleState> states;              ///< fleet states at the window start
  std::vector<ControlInput> prev_inputs;         ///< inputs applied one step earlier
  std::vector<std::vector<VehicleState>> refs;   ///< per vehicle, window of N+1 references
  std::vector<OrientedPolytope> obstacles;
};

/// Collision-avoidance optimal control problem over one horizon window.
/// Decision variables are the fleet input sequences plus, per unordered
/// vehicle (and vehicle-obstacle) pair and horizon step, the dual variables
/// (lambda, mu, s) whose feasibility certifies a separation of at least
/// d_min. States are eliminated by forward rollout of the vehicle model, so
/// the model enters the constraint derivatives through the rollout
/// sensitivities.
class FtcocProblem : public nlp::Problem {
 public:
  FtcocProblem(FtcocInputs in, const PlannerConfig& cfg);

  int num_vars() const override { return n_vars_; }
  int num_eq() const override { return n_eq_; }
  int num_ineq() const override { return n_ineq_; }
  Eigen::VectorXd lower_bounds() const override;
  Eigen::VectorXd upper_bounds() const override;
  Eigen::VectorXd initial_point() const override;

  void eval(const Eigen::VectorXd& w, double& f, Eigen::VectorXd& c_eq,
            Eigen::VectorXd& c_ineq) const override;
  void eval_derivs(const Eigen::VectorXd& w, double& f, Eigen::VectorXd& grad,
                   Eigen::VectorXd& c_eq, Eigen::MatrixXd& J_eq, Eigen::VectorXd& c_ineq,
                   Eigen::MatrixXd& J_ineq, Eigen::MatrixXd& H) const override;

  int num_vehicles() const { return V_; }
  int horizon() const { return N_; }
  int num_pairs() const { return static_cast<int>(pairs_.size()); }

  /// First input of each vehicle in the solution vector.
  std::vector<ControlInput> first_inputs(const Eigen::VectorXd& w) const;

  /// Warm start for the next window: inputs and dual streams shifted one
  /// step with the last block repeated; solver multipliers shifted alike.
  nlp::Solution shift_solution(const nlp::Solution& sol) const;

  /// Separation certificate stored in the solution for a pair and step.
  DualCertificate certificate(const Eigen::VectorXd& w, int pair, int k) const;

  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

 private:
  struct StateBoundRow {
    int vehicle, k, comp;
    double bound;
    double sign;  // +1: z - bound >= 0, -1: bound - z >= 0
  };

  void rollout(const Eigen::VectorXd& w, std::vector<std::vector<VehicleState>>& states,
               std::vector<std::vector<Eigen::MatrixXd>>* jac) const;

  int u_offset(int vehicle) const { return 2 * N_ * vehicle; }
  int dual_offset(int pair, int k) const { return n_inputs_ + 10 * ((N_ + 1) * pair + k); }
  int eq_offset(int pair, int k) const { return 4 * ((N_ + 1) * pair + k); }
  int pair_row_offset(int pair, int k) const
  {
    return n_rate_rows_ + n_state_rows_ + 2 * ((N_ + 1) * pair + k);
  }

  FtcocInputs in_;
  PlannerConfig cfg_;
  int V_, N_;
  // pair list: (i, j) with j >= 0 a vehicle index, j < 0 obstacle ~(j)
  std::vector<std::pair<int, int>> pairs_;
  std::vector<StateBoundRow> state_rows_;
  int n_inputs_, n_vars_, n_eq_, n_ineq_, n_rate_rows_, n_state_rows_;
};

/// Scene data the planner needs from a scenario.
struct PlanningScene {
  RoadGeometry road;
  std::vector<std::string> vehicle_ids;
  std::vector<VehicleParams> params;
  std::vector<VehicleState> initial_states;  ///< may be empty: start on the pattern
  std::vector<OrientedPolytope> obstacles;
};

struct PlanStats {
  int solves = 0;
  int iterations = 0;
  double max_kkt_residual = 0;
  double seconds = 0;
};

struct PlanResult {
  std::optional<FleetTrajectory> trajectory;
  int failed_step = -1;
  std::string message;
  PlanStats stats;

  bool feasible() const { return trajectory.has_value(); }
};

/// Closed-loop receding-horizon planning of one reconfiguration maneuver:
/// at each step the window problem is solved, the first input is applied to
/// the vehicle model, and the window shifts. Any solver failure discards
/// the whole maneuver.
PlanResult plan_maneuver(const ConfiguredPlatoon& ci, const ConfiguredPlatoon& cf,
                         const PlanningScene& scene, const PlannerConfig& cfg);

struct AuditReport {
  bool passed = true;
  double min_pair_distance = std::numeric_limits<double>::infinity();
  double min_obstacle_distance = std::numeric_limits<double>::infinity();
  double max_replay_error = 0;
  double max_bound_violation = 0;
  std::vector<std::string> violations;
};

/// Independent post-check of a stored maneuver: exact replay through the
/// model, limit satisfaction, and geometric separation of at least
/// d_min - dist_tol at every step (primal distances, not solver duals).
AuditReport audit_fleet_trajectory(const FleetTrajectory& traj, const Limits& limits,
                                   double dist_tol = 1e-4);

}  // namespace platoon
