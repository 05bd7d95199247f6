#include "platoon/follower.hpp"

#include <algorithm>
#include <cmath>

#include "platoon/nlp.hpp"

namespace platoon {

std::vector<VehicleState> resample_states(const std::vector<VehicleState>& states, double src_dt,
                                          double dst_dt)
{
  if (states.size() < 2) return states;
  const int src_n = static_cast<int>(states.size()) - 1;
  const double t_end = src_n * src_dt;
  const int dst_n = static_cast<int>(std::llround(t_end / dst_dt));
  std::vector<VehicleState> out(static_cast<size_t>(dst_n) + 1);
  for (int k = 0; k <= dst_n; ++k) {
    const double t = std::min(k * dst_dt, t_end);
    const int i = std::min(static_cast<int>(t / src_dt), src_n - 1);
    const double frac = std::clamp(t / src_dt - i, 0.0, 1.0);
    const VehicleState& z0 = states[i];
    const VehicleState& z1 = states[i + 1];
    VehicleState z;
    z.x = z0.x + frac * (z1.x - z0.x);
    z.y = z0.y + frac * (z1.y - z0.y);
    z.psi = wrap_angle(z0.psi + frac * wrap_angle(z1.psi - z0.psi));
    z.v = z0.v + frac * (z1.v - z0.v);
    out[k] = z;
  }
  return out;
}

namespace {

PlannerConfig tracking_config(const FollowerConfig& cfg)
{
  PlannerConfig pc;
  pc.N = cfg.N;
  pc.dt = cfg.dt;
  pc.Qz = cfg.Qz;
  pc.Qu = cfg.Qu;
  pc.Qdu = cfg.Qdu;
  pc.limits = cfg.limits;
  pc.kkt_tol = cfg.kkt_tol;
  pc.max_iter = cfg.max_iter;
  return pc;
}

FtcocInputs tracking_inputs(const VehicleParams& params, const VehicleState& z,
                            const ControlInput& u_prev,
                            const std::vector<VehicleState>& target_window, int N)
{
  FtcocInputs in;
  in.params = {params};
  in.states = {z};
  in.prev_inputs = {u_prev};
  in.refs.resize(1);
  in.refs[0].resize(N + 1);
  for (int k = 0; k <= N; ++k) {
    const int idx = std::min<int>(k, static_cast<int>(target_window.size()) - 1);
    in.refs[0][k] = target_window[idx];
  }
  return in;
}

}  // namespace

FollowStepResult follow_step(const VehicleParams& params, const VehicleState& z,
                             const ControlInput& u_prev,
                             const std::vector<VehicleState>& target_window,
                             const FollowerConfig& cfg)
{
  FollowStepResult out;
  if (target_window.empty()) {
    out.message = "empty target window";
    return out;
  }
  const PlannerConfig pc = tracking_config(cfg);
  FtcocProblem prob(tracking_inputs(params, z, u_prev, target_window, cfg.N), pc);
  nlp::SolverOptions opts;
  opts.kkt_tol = cfg.kkt_tol;
  opts.max_iter = cfg.max_iter;
  const nlp::Solution sol = nlp::solve(prob, opts);
  if (!nlp::succeeded(sol.status)) {
    out.message = sol.message;
    return out;
  }
  out.u = prob.first_inputs(sol.w)[0];
  out.ok = true;
  return out;
}

FollowRunResult follow_run(const VehicleParams& params, const VehicleState& z0,
                           const ControlInput& u0, const std::vector<VehicleState>& target,
                           double target_dt, const FollowerConfig& cfg)
{
  FollowRunResult out;
  if (target.size() < 2) return out;  // nothing to execute

  const std::vector<VehicleState> ref = resample_states(target, target_dt, cfg.dt);
  const int n = static_cast<int>(ref.size()) - 1;
  const PlannerConfig pc = tracking_config(cfg);

  out.states.reserve(n + 1);
  out.states.push_back(z0);
  VehicleState z = z0;
  ControlInput prev = u0;
  nlp::Solution warm;
  bool have_warm = false;

  for (int t = 0; t < n; ++t) {
    std::vector<VehicleState> window(cfg.N + 1);
    for (int k = 0; k <= cfg.N; ++k) window[k] = ref[std::min(t + k, n)];

    FtcocProblem prob(tracking_inputs(params, z, prev, window, cfg.N), pc);
    nlp::SolverOptions opts;
    opts.kkt_tol = cfg.kkt_tol;
    opts.max_iter = cfg.max_iter;
    opts.mu_init = have_warm ? 1e-4 : 1e-2;
    opts.bound_push = have_warm ? 1e-8 : 1e-2;
    const nlp::Solution sol = nlp::solve(prob, opts, have_warm ? &warm : nullptr);
    if (!nlp::succeeded(sol.status)) {
      out.ok = false;
      out.failed_step = t;
      out.message = sol.message;
      return out;
    }
    const ControlInput u = prob.first_inputs(sol.w)[0];
    z = step(params, z, u, cfg.dt);
    out.states.push_back(z);
    out.inputs.push_back(u);
    prev = u;
    warm = prob.shift_solution(sol);
    have_warm = true;

    out.max_position_error = std::max(
        out.max_position_error, std::hypot(z.x - ref[t + 1].x, z.y - ref[t + 1].y));
    out.max_speed_error = std::max(out.max_speed_error, std::abs(z.v - ref[t + 1].v));
  }
  return out;
}

}  // namespace platoon
