#pragma once

#include <Eigen/Core>

#include <limits>
#include <string>

namespace platoon::nlp {

/// Smooth nonlinear program
///   min f(w)  s.t.  c_eq(w) = 0,  c_ineq(w) >= 0,  lb <= w <= ub.
/// Implementations provide analytic first derivatives and a positive
/// semidefinite approximation of the objective Hessian (exact or
/// Gauss-Newton).
struct Problem {
  virtual ~Problem() = default;

  virtual int num_vars() const = 0;
  virtual int num_eq() const = 0;
  virtual int num_ineq() const = 0;

  virtual Eigen::VectorXd lower_bounds() const
  {
    return Eigen::VectorXd::Constant(num_vars(), -std::numeric_limits<double>::infinity());
  }
  virtual Eigen::VectorXd upper_bounds() const
  {
    return Eigen::VectorXd::Constant(num_vars(), std::numeric_limits<double>::infinity());
  }
  virtual Eigen::VectorXd initial_point() const { return Eigen::VectorXd::Zero(num_vars()); }

  /// Objective and constraint values only (used by the line search).
  virtual void eval(const Eigen::VectorXd& w, double& f, Eigen::VectorXd& c_eq,
                    Eigen::VectorXd& c_ineq) const = 0;

  /// Values plus first derivatives and the objective Hessian approximation.
  virtual void eval_derivs(const Eigen::VectorXd& w, double& f, Eigen::VectorXd& grad,
                           Eigen::VectorXd& c_eq, Eigen::MatrixXd& J_eq, Eigen::VectorXd& c_ineq,
                           Eigen::MatrixXd& J_ineq, Eigen::MatrixXd& H) const = 0;
};

enum class SolveStatus {
  converged,             ///< KKT residual at or below kkt_tol
  converged_acceptable,  ///< feasible and stationary to the acceptable tolerance
  infeasible_or_failed,  ///< iteration limit or no further progress
  numerical_failure,     ///< non-finite values encountered
};

inline bool succeeded(SolveStatus s)
{
  return s == SolveStatus::converged || s == SolveStatus::converged_acceptable;
}

struct SolverOptions {
  double kkt_tol = 1e-6;
  int max_iter = 300;
  double mu_init = 1e-1;
  double bound_push = 1e-2;       ///< relative interior push of the start point
  double acceptable_kkt = 1e-3;   ///< stationarity level accepted when stalled
  double acceptable_feas = 1e-7;  ///< feasibility level accepted when stalled
};

struct Solution {
  Eigen::VectorXd w;
  Eigen::VectorXd y;       ///< equality multipliers
  Eigen::VectorXd z;       ///< inequality multipliers, >= 0
  Eigen::VectorXd slacks;  ///< inequality slacks, > 0
  double objective = 0;
  double kkt_residual = std::numeric_limits<double>::infinity();
  double constraint_violation = std::numeric_limits<double>::infinity();
  SolveStatus status = SolveStatus::infeasible_or_failed;
  int iterations = 0;
  std::string message;
};

/// Primal-dual interior-point solve. Deterministic for identical inputs and
/// warm start. The warm start seeds the primal point and, when sizes match,
/// the multipliers.
Solution solve(const Problem& problem, const SolverOptions& options = {},
               const Solution* warm_start = nullptr);

}  // namespace platoon::nlp
