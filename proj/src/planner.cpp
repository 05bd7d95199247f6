#include "platoon/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "platoon/errors.hpp"

namespace platoon {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const VehicleTrajectory& FleetTrajectory::vehicle(const std::string& id) const
{
  for (const auto& v : vehicles) {
    if (v.id == id) return v;
  }
  throw key_not_found_error("no trajectory for vehicle '" + id + "'");
}

FtcocProblem::FtcocProblem(FtcocInputs in, const PlannerConfig& cfg)
    : in_(std::move(in)), cfg_(cfg), V_(static_cast<int>(in_.states.size())), N_(cfg.N)
{
  for (int i = 0; i < V_; ++i) {
    for (int j = i + 1; j < V_; ++j) pairs_.emplace_back(i, j);
  }
  for (int i = 0; i < V_; ++i) {
    for (size_t o = 0; o < in_.obstacles.size(); ++o) {
      pairs_.emplace_back(i, -static_cast<int>(o) - 1);
    }
  }

  n_inputs_ = 2 * N_ * V_;
  n_vars_ = n_inputs_ + 10 * (N_ + 1) * static_cast<int>(pairs_.size());
  n_eq_ = 4 * (N_ + 1) * static_cast<int>(pairs_.size());
  n_rate_rows_ = 4 * N_ * V_;

  for (int i = 0; i < V_; ++i) {
    for (int k = 1; k <= N_; ++k) {
      for (int m = 0; m < 4; ++m) {
        if (cfg_.limits.z_min[m] > -kInf) {
          state_rows_.push_back({i, k, m, cfg_.limits.z_min[m], +1.0});
        }
        if (cfg_.limits.z_max[m] < kInf) {
          state_rows_.push_back({i, k, m, cfg_.limits.z_max[m], -1.0});
        }
      }
    }
  }
  n_state_rows_ = static_cast<int>(state_rows_.size());
  n_ineq_ = n_rate_rows_ + n_state_rows_ + 2 * (N_ + 1) * static_cast<int>(pairs_.size());
}

Eigen::VectorXd FtcocProblem::lower_bounds() const
{
  Eigen::VectorXd lb = Eigen::VectorXd::Constant(n_vars_, -kInf);
  for (int i = 0; i < V_; ++i) {
    for (int k = 0; k < N_; ++k) {
      lb.segment<2>(u_offset(i) + 2 * k) = cfg_.limits.u_min;
    }
  }
  for (int p = 0; p < num_pairs(); ++p) {
    for (int k = 0; k <= N_; ++k) {
      lb.segment<8>(dual_offset(p, k)).setZero();  // lambda, mu >= 0; s free
    }
  }
  return lb;
}

Eigen::VectorXd FtcocProblem::upper_bounds() const
{
  Eigen::VectorXd ub = Eigen::VectorXd::Constant(n_vars_, kInf);
  for (int i = 0; i < V_; ++i) {
    for (int k = 0; k < N_; ++k) {
      ub.segment<2>(u_offset(i) + 2 * k) = cfg_.limits.u_max;
    }
  }
  return ub;
}

Eigen::VectorXd FtcocProblem::initial_point() const
{
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n_vars_);
  for (int i = 0; i < V_; ++i) {
    for (int k = 0; k < N_; ++k) {
      w.segment<2>(u_offset(i) + 2 * k) = in_.prev_inputs[i].vec();
    }
  }
  for (int p = 0; p < num_pairs(); ++p) {
    for (int k = 0; k <= N_; ++k) {
      w.segment<8>(dual_offset(p, k)).setConstant(0.05);
    }
  }
  return w;
}

void FtcocProblem::rollout(const Eigen::VectorXd& w,
                           std::vector<std::vector<VehicleState>>& states,
                           std::vector<std::vector<Eigen::MatrixXd>>* jac) const
{
  states.assign(V_, {});
  if (jac) jac->assign(V_, {});
  for (int i = 0; i < V_; ++i) {
    auto& zs = states[i];
    zs.resize(N_ + 1);
    zs[0] = in_.states[i];
    if (jac) (*jac)[i].assign(N_ + 1, Eigen::MatrixXd::Zero(4, 2 * N_));
    for (int k = 0; k < N_; ++k) {
      const ControlInput u = ControlInput::from_vec(w.segment<2>(u_offset(i) + 2 * k));
      zs[k + 1] = step(in_.params[i], zs[k], u, cfg_.dt);
      if (jac) {
        Eigen::Matrix4d A;
        Eigen::Matrix<double, 4, 2> B;
        step_jacobians(in_.params[i], zs[k], u, cfg_.dt, A, B);
        auto& G = (*jac)[i];
        G[k + 1].noalias() = A * G[k];
        G[k + 1].middleCols<2>(2 * k) += B;
      }
    }
  }
}

namespace {

// Objective terms shared by eval and eval_derivs.
struct CostWeights {
  Eigen::Array4d qz2;
  Eigen::Array2d qu2, qdu2;
};

double tracking_cost(const CostWeights& cw, const std::vector<VehicleState>& states,
                     const std::vector<VehicleState>& refs, const Eigen::VectorXd& w, int u_off,
                     int N, const Eigen::Vector2d& u_prev)
{
  double f = 0;
  for (int k = 0; k <= N; ++k) {
    const Eigen::Array4d e = (states[k].vec() - refs[k].vec()).array();
    f += (cw.qz2 * e * e).sum();
  }
  Eigen::Vector2d prev = u_prev;
  for (int k = 0; k < N; ++k) {
    const Eigen::Array2d u = w.segment<2>(u_off + 2 * k).array();
    const Eigen::Array2d du = u - prev.array();
    f += (cw.qu2 * u * u).sum() + (cw.qdu2 * du * du).sum();
    prev = u.matrix();
  }
  return f;
}

}  // namespace

void FtcocProblem::eval(const Eigen::VectorXd& w, double& f, Eigen::VectorXd& c_eq,
                        Eigen::VectorXd& c_ineq) const
{
  std::vector<std::vector<VehicleState>> states;
  rollout(w, states, nullptr);

  const CostWeights cw{cfg_.Qz.array().square(), cfg_.Qu.array().square(),
                       cfg_.Qdu.array().square()};
  f = 0;
  for (int i = 0; i < V_; ++i) {
    f += tracking_cost(cw, states[i], in_.refs[i], w, u_offset(i), N_,
                       in_.prev_inputs[i].vec());
  }

  c_eq.resize(n_eq_);
  c_ineq.resize(n_ineq_);

  // input-rate rows
  for (int i = 0; i < V_; ++i) {
    Eigen::Vector2d prev = in_.prev_inputs[i].vec();
    for (int k = 0; k < N_; ++k) {
      const Eigen::Vector2d u = w.segment<2>(u_offset(i) + 2 * k);
      for (int c = 0; c < 2; ++c) {
        const int row = i * 4 * N_ + k * 4 + 2 * c;
        c_ineq[row] = u[c] - prev[c] - cfg_.limits.du_min[c];
        c_ineq[row + 1] = cfg_.limits.du_max[c] - (u[c] - prev[c]);
      }
      prev = u;
    }
  }
  // state-bound rows
  for (int r = 0; r < n_state_rows_; ++r) {
    const auto& sr = state_rows_[r];
    const double zm = states[sr.vehicle][sr.k].vec()[sr.comp];
    c_ineq[n_rate_rows_ + r] = sr.sign * (zm - sr.bound);
  }
  // separation certificates
  for (int p = 0; p < num_pairs(); ++p) {
    const auto [i, j] = pairs_[p];
    for (int k = 0; k <= N_; ++k) {
      const OrientedPolytope Pi = footprint(states[i][k], in_.params[i]);
      const OrientedPolytope Pj =
          j >= 0 ? footprint(states[j][k], in_.params[j]) : in_.obstacles[-j - 1];
      const auto lam = w.segment<4>(dual_offset(p, k));
      const auto mu = w.segment<4>(dual_offset(p, k) + 4);
      const auto sv = w.segment<2>(dual_offset(p, k) + 8);
      c_eq.segment<2>(eq_offset(p, k)) = Pi.A.transpose() * lam + sv;
      c_eq.segment<2>(eq_offset(p, k) + 2) = Pj.A.transpose() * mu - sv;
      c_ineq[pair_row_offset(p, k)] = -Pi.b.dot(lam) - Pj.b.dot(mu) - cfg_.d_min;
      c_ineq[pair_row_offset(p, k) + 1] = 1.0 - sv.squaredNorm();
    }
  }
}

void FtcocProblem::eval_derivs(const Eigen::VectorXd& w, double& f, Eigen::VectorXd& grad,
                               Eigen::VectorXd& c_eq, Eigen::MatrixXd& J_eq,
                               Eigen::VectorXd& c_ineq, Eigen::MatrixXd& J_ineq,
                               Eigen::MatrixXd& H) const
{
  std::vector<std::vector<VehicleState>> states;
  std::vector<std::vector<Eigen::MatrixXd>> G;
  rollout(w, states, &G);

  eval(w, f, c_eq, c_ineq);  // values reuse the same rollout equations

  const CostWeights cw{cfg_.Qz.array().square(), cfg_.Qu.array().square(),
                       cfg_.Qdu.array().square()};

  grad.setZero(n_vars_);
  H.setZero(n_vars_, n_vars_);
  for (int i = 0; i < V_; ++i) {
    const int off = u_offset(i);
    auto gu = grad.segment(off, 2 * N_);
    auto Hu = H.block(off, off, 2 * N_, 2 * N_);
    for (int k = 0; k <= N_; ++k) {
      const Eigen::Vector4d e = states[i][k].vec() - in_.refs[i][k].vec();
      gu.noalias() += G[i][k].transpose() * (2.0 * cw.qz2 * e.array()).matrix();
      Hu.noalias() += G[i][k].transpose() * (2.0 * cw.qz2).matrix().asDiagonal() * G[i][k];
    }
    Eigen::Vector2d prev = in_.prev_inputs[i].vec();
    for (int k = 0; k < N_; ++k) {
      const Eigen::Vector2d u = w.segment<2>(off + 2 * k);
      const Eigen::Vector2d du = u - prev;
      gu.segment<2>(2 * k) += (2.0 * cw.qu2 * u.array()).matrix();
      gu.segment<2>(2 * k) += (2.0 * cw.qdu2 * du.array()).matrix();
      if (k > 0) gu.segment<2>(2 * (k - 1)) -= (2.0 * cw.qdu2 * du.array()).matrix();
      Hu.block<2, 2>(2 * k, 2 * k) += (2.0 * (cw.qu2 + cw.qdu2)).matrix().asDiagonal();
      if (k > 0) {
        Hu.block<2, 2>(2 * k, 2 * (k - 1)) -= (2.0 * cw.qdu2).matrix().asDiagonal();
        Hu.block<2, 2>(2 * (k - 1), 2 * k) -= (2.0 * cw.qdu2).matrix().asDiagonal();
        Hu.block<2, 2>(2 * (k - 1), 2 * (k - 1)) += (2.0 * cw.qdu2).matrix().asDiagonal();
      }
      prev = u;
    }
  }

  J_eq.setZero(n_eq_, n_vars_);
  J_ineq.setZero(n_ineq_, n_vars_);

  // input-rate rows
  for (int i = 0; i < V_; ++i) {
    for (int k = 0; k < N_; ++k) {
      for (int c = 0; c < 2; ++c) {
        const int row = i * 4 * N_ + k * 4 + 2 * c;
        const int col = u_offset(i) + 2 * k + c;
        J_ineq(row, col) = 1.0;
        J_ineq(row + 1, col) = -1.0;
        if (k > 0) {
          J_ineq(row, col - 2) = -1.0;
          J_ineq(row + 1, col - 2) = 1.0;
        }
      }
    }
  }
  // state-bound rows
  for (int r = 0; r < n_state_rows_; ++r) {
    const auto& sr = state_rows_[r];
    J_ineq.block(n_rate_rows_ + r, u_offset(sr.vehicle), 1, 2 * N_) =
        sr.sign * G[sr.vehicle][sr.k].row(sr.comp);
  }
  // separation rows
  for (int p = 0; p < num_pairs(); ++p) {
    const auto [i, j] = pairs_[p];
    for (int k = 0; k <= N_; ++k) {
      const int doff = dual_offset(p, k);
      const int eoff = eq_offset(p, k);
      const int mrow = pair_row_offset(p, k);
      const auto lam = w.segment<4>(doff);
      const auto mu = w.segment<4>(doff + 4);
      const auto sv = w.segment<2>(doff + 8);

      const OrientedPolytope Pi = footprint(states[i][k], in_.params[i]);
      const FootprintJacobian Ji = footprint_jacobian(states[i][k], in_.params[i]);

      J_eq.block<2, 4>(eoff, doff) = Pi.A.transpose();
      J_eq.block<2, 2>(eoff, doff + 8).setIdentity();
      J_eq.block<2, 2>(eoff + 2, doff + 8) = -Eigen::Matrix2d::Identity();
      J_ineq.block<1, 4>(mrow, doff) = -Pi.b.transpose();
      J_ineq.block<1, 2>(mrow, doff + 8).setZero();
      J_ineq(mrow + 1, doff + 8) = -2.0 * sv[0];
      J_ineq(mrow + 1, doff + 9) = -2.0 * sv[1];

      // state coupling of vehicle i (zero at k = 0 since G[i][0] = 0)
      const Eigen::Vector2d dAl = Ji.dA_dpsi.transpose() * lam;
      J_eq.block(eoff, u_offset(i), 2, 2 * N_).noalias() += dAl * G[i][k].row(2);
      const Eigen::RowVector3d bl = lam.transpose() * Ji.db_dz;
      J_ineq.block(mrow, u_offset(i), 1, 2 * N_).noalias() -= bl * G[i][k].topRows(3);

      if (j >= 0) {
        const OrientedPolytope Pj = footprint(states[j][k], in_.params[j]);
        const FootprintJacobian Jj = footprint_jacobian(states[j][k], in_.params[j]);
        J_eq.block<2, 4>(eoff + 2, doff + 4) = Pj.A.transpose();
        J_ineq.block<1, 4>(mrow, doff + 4) = -Pj.b.transpose();
        const Eigen::Vector2d dAm = Jj.dA_dpsi.transpose() * mu;
        J_eq.block(eoff + 2, u_offset(j), 2, 2 * N_).noalias() += dAm * G[j][k].row(2);
        const Eigen::RowVector3d bm = mu.transpose() * Jj.db_dz;
        J_ineq.block(mrow, u_offset(j), 1, 2 * N_).noalias() -= bm * G[j][k].topRows(3);
      } else {
        const OrientedPolytope& Pj = in_.obstacles[-j - 1];
        J_eq.block<2, 4>(eoff + 2, doff + 4) = Pj.A.transpose();
        J_ineq.block<1, 4>(mrow, doff + 4) = -Pj.b.transpose();
      }
    }
  }
}

std::vector<ControlInput> FtcocProblem::first_inputs(const Eigen::VectorXd& w) const
{
  std::vector<ControlInput> us(V_);
  for (int i = 0; i < V_; ++i) us[i] = ControlInput::from_vec(w.segment<2>(u_offset(i)));
  return us;
}

DualCertificate FtcocProblem::certificate(const Eigen::VectorXd& w, int pair, int k) const
{
  DualCertificate cert;
  cert.lambda = w.segment<4>(dual_offset(pair, k));
  cert.mu = w.segment<4>(dual_offset(pair, k) + 4);
  cert.s = w.segment<2>(dual_offset(pair, k) + 8);
  return cert;
}

namespace {

// Shift [off, off + size*count) one block left, repeating the last block.
void shift_blocks(Eigen::VectorXd& v, int off, int size, int count)
{
  if (count <= 1) return;
  for (int b = 0; b + 1 < count; ++b) {
    v.segment(off + b * size, size) = v.segment(off + (b + 1) * size, size);
  }
}

}  // namespace

nlp::Solution FtcocProblem::shift_solution(const nlp::Solution& sol) const
{
  nlp::Solution out = sol;
  if (out.w.size() != n_vars_) return out;
  for (int i = 0; i < V_; ++i) shift_blocks(out.w, u_offset(i), 2, N_);
  for (int p = 0; p < num_pairs(); ++p) shift_blocks(out.w, dual_offset(p, 0), 10, N_ + 1);
  if (out.y.size() == n_eq_) {
    for (int p = 0; p < num_pairs(); ++p) shift_blocks(out.y, eq_offset(p, 0), 4, N_ + 1);
  }
  if (out.z.size() == n_ineq_) {
    for (int i = 0; i < V_; ++i) shift_blocks(out.z, i * 4 * N_, 4, N_);
    const int per_step = n_state_rows_ / std::max(1, V_ * N_);
    for (int i = 0; i < V_; ++i) {
      shift_blocks(out.z, n_rate_rows_ + i * N_ * per_step, per_step, N_);
    }
    for (int p = 0; p < num_pairs(); ++p) {
      shift_blocks(out.z, n_rate_rows_ + n_state_rows_ + 2 * (N_ + 1) * p, 2, N_ + 1);
    }
  }
  return out;
}

namespace {

std::vector<int> slot_of_ids(const ConfiguredPlatoon& cp, const std::vector<std::string>& ids)
{
  std::vector<int> slots(ids.size(), -1);
  for (size_t vi = 0; vi < ids.size(); ++vi) {
    const auto it = std::find(cp.vehicle_ids.begin(), cp.vehicle_ids.end(), ids[vi]);
    if (it == cp.vehicle_ids.end()) {
      throw key_not_found_error("vehicle '" + ids[vi] + "' not assigned to a configuration slot");
    }
    slots[vi] = static_cast<int>(it - cp.vehicle_ids.begin());
  }
  return slots;
}

}  // namespace

PlanResult plan_maneuver(const ConfiguredPlatoon& ci, const ConfiguredPlatoon& cf,
                         const PlanningScene& scene, const PlannerConfig& cfg)
{
  const auto t_start = std::chrono::steady_clock::now();
  PlanResult out;
  const int V = static_cast<int>(scene.vehicle_ids.size());
  if (V == 0) {
    out.message = "empty fleet";
    return out;
  }
  if (std::set<std::string>(ci.vehicle_ids.begin(), ci.vehicle_ids.end()) !=
          std::set<std::string>(scene.vehicle_ids.begin(), scene.vehicle_ids.end()) ||
      std::set<std::string>(cf.vehicle_ids.begin(), cf.vehicle_ids.end()) !=
          std::set<std::string>(scene.vehicle_ids.begin(), scene.vehicle_ids.end())) {
    out.message = "configuration vehicle ids do not match the fleet";
    return out;
  }

  const std::vector<Eigen::Vector2d> slots = expand(ci.cfg, scene.road, scene.params.front());
  const std::vector<int> slot_idx = slot_of_ids(ci, scene.vehicle_ids);

  std::vector<VehicleState> z0(V);
  double x_offset = 0;
  if (!scene.initial_states.empty()) {
    double dx_min = kInf, dx_max = -kInf;
    for (int vi = 0; vi < V; ++vi) {
      const Eigen::Vector2d& slot = slots[slot_idx[vi]];
      const VehicleState& z = scene.initial_states[vi];
      if (std::abs(z.y - slot.y()) > 1e-6) {
        out.message = "initial state of '" + scene.vehicle_ids[vi] +
                      "' is not on its configured lane center";
        return out;
      }
      dx_min = std::min(dx_min, z.x - slot.x());
      dx_max = std::max(dx_max, z.x - slot.x());
    }
    if (dx_max - dx_min > 1e-6) {
      out.message = "initial longitudinal spacing does not match the initial configuration";
      return out;
    }
    z0 = scene.initial_states;
    x_offset = 0.5 * (dx_min + dx_max);
  } else {
    for (int vi = 0; vi < V; ++vi) {
      z0[vi] = VehicleState{slots[slot_idx[vi]].x(), slots[slot_idx[vi]].y(), 0.0, cfg.v_max};
    }
  }

  const ReferenceSet refs = build_reference(ci, cf, cfg.rho, cfg.v_max, cfg.T, cfg.dt,
                                            scene.road, scene.params.front(), x_offset);

  // Maneuvers must start separated; otherwise the first window has no
  // feasible certificate.
  for (int i = 0; i < V; ++i) {
    for (int j = i + 1; j < V; ++j) {
      const double d =
          polytope_distance(footprint(z0[i], scene.params[i]), footprint(z0[j], scene.params[j]))
              .dist;
      if (d < cfg.d_min - 1e-12) {
        out.message = "initial separation below d_min for pair (" + scene.vehicle_ids[i] + ", " +
                      scene.vehicle_ids[j] + ")";
        return out;
      }
    }
    for (const auto& obs : scene.obstacles) {
      if (polytope_distance(footprint(z0[i], scene.params[i]), obs).dist < cfg.d_min - 1e-12) {
        out.message = "initial separation below d_min to an obstacle";
        return out;
      }
    }
  }

  std::vector<std::vector<VehicleState>> states(V);
  std::vector<std::vector<ControlInput>> inputs(V);
  std::vector<VehicleState> z = z0;
  std::vector<ControlInput> prev(V);
  for (int vi = 0; vi < V; ++vi) states[vi].push_back(z0[vi]);

  nlp::Solution warm;
  bool have_warm = false;
  for (int t = 0; t < cfg.T; ++t) {
    FtcocInputs fin;
    fin.params = scene.params;
    fin.states = z;
    fin.prev_inputs = prev;
    fin.obstacles = scene.obstacles;
    fin.refs.resize(V);
    for (int vi = 0; vi < V; ++vi) {
      const auto& full = refs.for_vehicle(scene.vehicle_ids[vi]).states;
      auto& win = fin.refs[vi];
      win.resize(cfg.N + 1);
      for (int k = 0; k <= cfg.N; ++k) win[k] = full[std::min(t + k, cfg.T)];
    }

    FtcocProblem prob(std::move(fin), cfg);
    nlp::SolverOptions opts;
    opts.kkt_tol = cfg.kkt_tol;
    opts.max_iter = cfg.max_iter;
    opts.mu_init = have_warm ? 1e-3 : 1e-1;
    opts.bound_push = have_warm ? 1e-6 : 1e-2;
    const nlp::Solution sol = nlp::solve(prob, opts, have_warm ? &warm : nullptr);
    out.stats.solves += 1;
    out.stats.iterations += sol.iterations;
    out.stats.max_kkt_residual = std::max(out.stats.max_kkt_residual, sol.kkt_residual);
    if (!nlp::succeeded(sol.status)) {
      out.failed_step = t;
      out.message = "window solve failed at step " + std::to_string(t) + ": " + sol.message;
      out.stats.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      return out;
    }

    const std::vector<ControlInput> u = prob.first_inputs(sol.w);
    for (int vi = 0; vi < V; ++vi) {
      z[vi] = step(scene.params[vi], z[vi], u[vi], cfg.dt);
      states[vi].push_back(z[vi]);
      inputs[vi].push_back(u[vi]);
    }
    prev = u;
    warm = prob.shift_solution(sol);
    have_warm = true;
  }

  FleetTrajectory traj;
  traj.rho = cfg.rho;
  traj.d_min = cfg.d_min;
  traj.dt = cfg.dt;
  traj.v_max = cfg.v_max;
  traj.obstacles = scene.obstacles;
  traj.vehicles.resize(V);
  for (int vi = 0; vi < V; ++vi) {
    traj.vehicles[vi] =
        VehicleTrajectory{scene.vehicle_ids[vi], scene.params[vi], std::move(states[vi]),
                          std::move(inputs[vi]), cfg.rho};
  }

  const AuditReport audit = audit_fleet_trajectory(traj, cfg.limits);
  out.stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (!audit.passed) {
    out.message = "post-plan audit failed: " + audit.violations.front();
    return out;
  }
  out.trajectory = std::move(traj);
  return out;
}

AuditReport audit_fleet_trajectory(const FleetTrajectory& traj, const Limits& limits,
                                   double dist_tol)
{
  AuditReport rep;
  const int T = traj.horizon();
  const double bound_tol = 1e-6;
  char buf[160];

  for (const auto& veh : traj.vehicles) {
    if (static_cast<int>(veh.inputs.size()) != T) {
      rep.passed = false;
      rep.violations.push_back("vehicle " + veh.id + ": input/state length mismatch");
      return rep;
    }
    VehicleState z = veh.states.front();
    ControlInput prev{};
    for (int t = 0; t < T; ++t) {
      z = step(veh.params, z, veh.inputs[t], traj.dt);
      const double err =
          (z.vec() - veh.states[t + 1].vec()).lpNorm<Eigen::Infinity>();
      rep.max_replay_error = std::max(rep.max_replay_error, err);
      if (err > 1e-9) {
        rep.passed = false;
        std::snprintf(buf, sizeof buf, "vehicle %s: replay error %.3e at step %d",
                      veh.id.c_str(), err, t + 1);
        rep.violations.push_back(buf);
      }
      const Eigen::Vector2d u = veh.inputs[t].vec();
      const Eigen::Vector2d du = u - prev.vec();
      double viol = 0;
      viol = std::max(viol, (limits.u_min - u).maxCoeff());
      viol = std::max(viol, (u - limits.u_max).maxCoeff());
      viol = std::max(viol, (limits.du_min - du).maxCoeff());
      viol = std::max(viol, (du - limits.du_max).maxCoeff());
      for (int m = 0; m < 4; ++m) {
        const double zm = veh.states[t + 1].vec()[m];
        if (limits.z_min[m] > -kInf) viol = std::max(viol, limits.z_min[m] - zm);
        if (limits.z_max[m] < kInf) viol = std::max(viol, zm - limits.z_max[m]);
      }
      rep.max_bound_violation = std::max(rep.max_bound_violation, std::max(viol, 0.0));
      if (viol > bound_tol) {
        rep.passed = false;
        std::snprintf(buf, sizeof buf, "vehicle %s: limit violation %.3e at step %d",
                      veh.id.c_str(), viol, t);
        rep.violations.push_back(buf);
      }
      prev = veh.inputs[t];
    }
  }

  const int V = static_cast<int>(traj.vehicles.size());
  for (int t = 0; t <= T; ++t) {
    std::vector<OrientedPolytope> polys(V);
    for (int i = 0; i < V; ++i) {
      polys[i] = footprint(traj.vehicles[i].states[t], traj.vehicles[i].params);
    }
    for (int i = 0; i < V; ++i) {
      for (int j = i + 1; j < V; ++j) {
        const double d = polytope_distance(polys[i], polys[j]).dist;
        rep.min_pair_distance = std::min(rep.min_pair_distance, d);
        if (d < traj.d_min - dist_tol) {
          rep.passed = false;
          std::snprintf(buf, sizeof buf, "pair (%s, %s): distance %.6f < %.6f at step %d",
                        traj.vehicles[i].id.c_str(), traj.vehicles[j].id.c_str(), d, traj.d_min,
                        t);
          rep.violations.push_back(buf);
        }
      }
      for (const auto& obs : traj.obstacles) {
        const double d = polytope_distance(polys[i], obs).dist;
        rep.min_obstacle_distance = std::min(rep.min_obstacle_distance, d);
        if (d < traj.d_min - dist_tol) {
          rep.passed = false;
          std::snprintf(buf, sizeof buf, "vehicle %s vs obstacle: distance %.6f < %.6f at step %d",
                        traj.vehicles[i].id.c_str(), d, traj.d_min, t);
          rep.violations.push_back(buf);
        }
      }
    }
  }
  return rep;
}

}  // namespace platoon
