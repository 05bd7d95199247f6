#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "platoon/nlp.hpp"

namespace platoon::nlp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(double v) { return std::isfinite(v); }
bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace

// Primal-dual interior point with slacks on general inequalities and
// log barriers on finite variable bounds. Inequality multipliers and slacks
// are eliminated from the Newton system, leaving a symmetric saddle system
// in (dw, dy) that is solved densely.
Solution solve(const Problem& problem, const SolverOptions& options, const Solution* warm_start)
{
  const int n = problem.num_vars();
  const int mE = problem.num_eq();
  const int mI = problem.num_ineq();
  const Eigen::VectorXd lb = problem.lower_bounds();
  const Eigen::VectorXd ub = problem.upper_bounds();

  Solution out;
  out.status = SolveStatus::infeasible_or_failed;

  // --- start point, pushed strictly inside the bounds ---
  Eigen::VectorXd w = (warm_start && warm_start->w.size() == n) ? warm_start->w
                                                                : problem.initial_point();
  const double push = options.bound_push;
  for (int i = 0; i < n; ++i) {
    const bool has_lb = lb[i] > -kInf;
    const bool has_ub = ub[i] < kInf;
    if (has_lb && has_ub) {
      const double pad = std::min(push * std::max(1.0, std::abs(lb[i])), 0.25 * (ub[i] - lb[i]));
      const double pad_u = std::min(push * std::max(1.0, std::abs(ub[i])), 0.25 * (ub[i] - lb[i]));
      w[i] = std::clamp(w[i], lb[i] + pad, ub[i] - pad_u);
    } else if (has_lb) {
      w[i] = std::max(w[i], lb[i] + push * std::max(1.0, std::abs(lb[i])));
    } else if (has_ub) {
      w[i] = std::min(w[i], ub[i] - push * std::max(1.0, std::abs(ub[i])));
    }
  }

  double mu = options.mu_init;
  const double mu_min = options.kkt_tol / 10;

  double f = 0;
  Eigen::VectorXd g(n), cE(mE), cI(mI);
  Eigen::MatrixXd JE(mE, n), JI(mI, n), H(n, n);
  problem.eval_derivs(w, f, g, cE, JE, cI, JI, H);
  if (!finite(f) || !finite(g) || !finite(cE) || !finite(cI)) {
    out.message = "non-finite problem data at the start point";
    out.status = SolveStatus::numerical_failure;
    out.w = w;
    return out;
  }

  Eigen::VectorXd s = cI.cwiseMax(std::max(mu, 1e-8));
  Eigen::VectorXd z;
  if (warm_start && warm_start->z.size() == mI && mI > 0) {
    z = warm_start->z.cwiseMax(1e-8).cwiseMin(1e8);
  } else {
    z = (mu * s.cwiseInverse()).cwiseMax(1e-8).cwiseMin(1e8);
  }
  Eigen::VectorXd y = (warm_start && warm_start->y.size() == mE) ? warm_start->y
                                                                 : Eigen::VectorXd::Zero(mE);
  Eigen::VectorXd zl = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd zu = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (lb[i] > -kInf) zl[i] = std::clamp(mu / (w[i] - lb[i]), 1e-8, 1e8);
    if (ub[i] < kInf) zu[i] = std::clamp(mu / (ub[i] - w[i]), 1e-8, 1e8);
  }

  double nu = 1.0;       // l1 penalty weight of the merit function
  double delta_w = 0.0;  // primal regularization
  const double delta_c = 1e-8;
  int fail_streak = 0;

  double best_err = kInf;
  Solution best;

  Eigen::MatrixXd K(n + mE, n + mE);
  Eigen::VectorXd rhs(n + mE);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  const auto barrier_value = [&](const Eigen::VectorXd& wv, const Eigen::VectorXd& sv,
                                 double fv) {
    double phi = fv;
    for (int i = 0; i < mI; ++i) phi -= mu * std::log(sv[i]);
    for (int i = 0; i < n; ++i) {
      if (lb[i] > -kInf) phi -= mu * std::log(wv[i] - lb[i]);
      if (ub[i] < kInf) phi -= mu * std::log(ub[i] - wv[i]);
    }
    return phi;
  };

  for (int iter = 0; iter <= options.max_iter; ++iter) {
    // --- residuals and termination ---
    Eigen::VectorXd r_w = g;
    if (mE > 0) r_w.noalias() += JE.transpose() * y;
    if (mI > 0) r_w.noalias() -= JI.transpose() * z;
    r_w -= zl;
    r_w += zu;
    const Eigen::VectorXd r_I = cI - s;

    double comp = 0, comp_mu = 0;
    for (int i = 0; i < mI; ++i) {
      comp = std::max(comp, std::abs(s[i] * z[i]));
      comp_mu = std::max(comp_mu, std::abs(s[i] * z[i] - mu));
    }
    for (int i = 0; i < n; ++i) {
      if (lb[i] > -kInf) {
        comp = std::max(comp, std::abs((w[i] - lb[i]) * zl[i]));
        comp_mu = std::max(comp_mu, std::abs((w[i] - lb[i]) * zl[i] - mu));
      }
      if (ub[i] < kInf) {
        comp = std::max(comp, std::abs((ub[i] - w[i]) * zu[i]));
        comp_mu = std::max(comp_mu, std::abs((ub[i] - w[i]) * zu[i] - mu));
      }
    }
    const double mult_sum = y.lpNorm<1>() + z.lpNorm<1>() + zl.lpNorm<1>() + zu.lpNorm<1>();
    const int mult_count = mE + mI + 2 * n;
    const double sd = std::max(100.0, mult_sum / std::max(1, mult_count)) / 100.0;

    const double feas = std::max(inf_norm(cE), mI > 0 ? std::max(0.0, (-cI).maxCoeff()) : 0.0);
    const double err0 =
        std::max({inf_norm(r_w) / sd, inf_norm(cE), inf_norm(r_I), comp / sd});
    const double err_mu =
        std::max({inf_norm(r_w) / sd, inf_norm(cE), inf_norm(r_I), comp_mu / sd});

    if (err0 < best_err) {
      best_err = err0;
      best.w = w;
      best.y = y;
      best.z = z;
      best.slacks = s;
      best.objective = f;
      best.kkt_residual = err0;
      best.constraint_violation = feas;
      best.iterations = iter;
    }

    if (err0 <= options.kkt_tol) {
      best.status = SolveStatus::converged;
      best.message = "optimal";
      return best;
    }
    if (iter == options.max_iter) break;

    // --- barrier update ---
    if (err_mu <= 10 * mu && mu > mu_min) {
      mu = std::max(mu_min, std::min(0.2 * mu, std::pow(mu, 1.5)));
      continue;
    }

    // --- condensed Newton system ---
    Eigen::VectorXd sigma_b = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd rhs_w = -g;
    if (mE > 0) rhs_w.noalias() -= JE.transpose() * y;
    for (int i = 0; i < n; ++i) {
      if (lb[i] > -kInf) {
        sigma_b[i] += zl[i] / (w[i] - lb[i]);
        rhs_w[i] += mu / (w[i] - lb[i]);
      }
      if (ub[i] < kInf) {
        sigma_b[i] += zu[i] / (ub[i] - w[i]);
        rhs_w[i] -= mu / (ub[i] - w[i]);
      }
    }
    Eigen::VectorXd sigma_s(mI);
    if (mI > 0) {
      sigma_s = z.cwiseQuotient(s);
      rhs_w.noalias() += JI.transpose() * (mu * s.cwiseInverse() - sigma_s.cwiseProduct(r_I));
    }

    Eigen::VectorXd dw(n), dy(mE), ds(mI), dz(mI), dzl(n), dzu(n);
    bool direction_ok = false;
    for (int attempt = 0; attempt < 12 && !direction_ok; ++attempt) {
      K.setZero();
      K.topLeftCorner(n, n) = H;
      if (mI > 0) {
        K.topLeftCorner(n, n).noalias() += JI.transpose() * sigma_s.asDiagonal() * JI;
      }
      K.topLeftCorner(n, n).diagonal() += sigma_b;
      K.topLeftCorner(n, n).diagonal().array() += delta_w;
      if (mE > 0) {
        K.topRightCorner(n, mE) = JE.transpose();
        K.bottomLeftCorner(mE, n) = JE;
        K.bottomRightCorner(mE, mE).diagonal().setConstant(-delta_c);
      }
      rhs.head(n) = rhs_w;
      rhs.tail(mE) = -cE;

      lu.compute(K);
      const Eigen::VectorXd d = lu.solve(rhs);
      if (!finite(d)) {
        delta_w = std::max(10 * std::max(delta_w, 1e-8), 1e-8);
        continue;
      }
      dw = d.head(n);
      dy = d.tail(mE);
      if (mI > 0) {
        ds = JI * dw + r_I;
        dz = -(s.cwiseProduct(z).array() - mu + z.cwiseProduct(ds).array()).matrix()
                  .cwiseQuotient(s);
      }
      for (int i = 0; i < n; ++i) {
        dzl[i] = lb[i] > -kInf ? -((w[i] - lb[i]) * zl[i] - mu + zl[i] * dw[i]) / (w[i] - lb[i])
                               : 0.0;
        dzu[i] = ub[i] < kInf ? -((ub[i] - w[i]) * zu[i] - mu - zu[i] * dw[i]) / (ub[i] - w[i])
                              : 0.0;
      }

      // Penalty weight large enough that the direction is a merit descent.
      double mult_inf = std::max(inf_norm(y + dy), inf_norm(z + dz));
      nu = std::max(nu, 1.2 * mult_inf + 1.0);
      double dphi = g.dot(dw);
      for (int i = 0; i < mI; ++i) dphi -= mu * ds[i] / s[i];
      for (int i = 0; i < n; ++i) {
        if (lb[i] > -kInf) dphi -= mu * dw[i] / (w[i] - lb[i]);
        if (ub[i] < kInf) dphi += mu * dw[i] / (ub[i] - w[i]);
      }
      const double viol1 = cE.lpNorm<1>() + r_I.lpNorm<1>();
      dphi -= nu * viol1;
      if (dphi < 0 || viol1 > 1e-14) {
        direction_ok = true;
      } else {
        delta_w = std::max(10 * std::max(delta_w, 1e-8), 1e-8);
      }
    }
    if (!direction_ok) {
      best.message = "could not produce a descent direction";
      break;
    }

    // --- fraction-to-boundary step caps ---
    const double tau = std::max(0.99, 1.0 - mu);
    double alpha_p = 1.0, alpha_d = 1.0;
    for (int i = 0; i < mI; ++i) {
      if (ds[i] < 0) alpha_p = std::min(alpha_p, -tau * s[i] / ds[i]);
      if (dz[i] < 0) alpha_d = std::min(alpha_d, -tau * z[i] / dz[i]);
    }
    for (int i = 0; i < n; ++i) {
      if (lb[i] > -kInf) {
        if (dw[i] < 0) alpha_p = std::min(alpha_p, -tau * (w[i] - lb[i]) / dw[i]);
        if (dzl[i] < 0) alpha_d = std::min(alpha_d, -tau * zl[i] / dzl[i]);
      }
      if (ub[i] < kInf) {
        if (dw[i] > 0) alpha_p = std::min(alpha_p, tau * (ub[i] - w[i]) / dw[i]);
        if (dzu[i] < 0) alpha_d = std::min(alpha_d, -tau * zu[i] / dzu[i]);
      }
    }

    // --- backtracking line search on the l1 barrier merit ---
    const double viol1 = cE.lpNorm<1>() + r_I.lpNorm<1>();
    const double phi0 = barrier_value(w, s, f) + nu * viol1;
    double dphi = g.dot(dw);
    for (int i = 0; i < mI; ++i) dphi -= mu * ds[i] / s[i];
    for (int i = 0; i < n; ++i) {
      if (lb[i] > -kInf) dphi -= mu * dw[i] / (w[i] - lb[i]);
      if (ub[i] < kInf) dphi += mu * dw[i] / (ub[i] - w[i]);
    }
    dphi -= nu * viol1;

    double alpha = alpha_p;
    bool accepted = false;
    double f_t = 0;
    Eigen::VectorXd w_t, s_t, cE_t(mE), cI_t(mI);
    for (int ls = 0; ls < 60 && alpha > 1e-14; ++ls, alpha *= 0.5) {
      w_t = w + alpha * dw;
      s_t = s + alpha * ds;
      problem.eval(w_t, f_t, cE_t, cI_t);
      if (!finite(f_t) || !finite(cE_t) || !finite(cI_t)) continue;
      const double phi_t =
          barrier_value(w_t, s_t, f_t) + nu * (cE_t.lpNorm<1>() + (cI_t - s_t).lpNorm<1>());
      if (phi_t <= phi0 + 1e-4 * alpha * dphi) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      ++fail_streak;
      delta_w = std::max(10 * std::max(delta_w, 1e-8), 1e-8);
      if (fail_streak == 2 && mI > 0) {
        // Re-center slacks and inequality multipliers and try again.
        s = cI.cwiseMax(mu);
        z = (mu * s.cwiseInverse()).cwiseMax(1e-8).cwiseMin(1e8);
        continue;
      }
      if (fail_streak >= 4) {
        if (best.constraint_violation <= options.acceptable_feas &&
            best.kkt_residual <= options.acceptable_kkt) {
          best.status = SolveStatus::converged_acceptable;
          best.message = "stalled at an acceptable point";
          return best;
        }
        best.message = "line search failed";
        break;
      }
      continue;
    }
    fail_streak = 0;
    delta_w /= 3;
    if (delta_w < 1e-12) delta_w = 0;

    w = w_t;
    s = s_t.cwiseMax(1e-300);
    y += alpha_d * dy;
    z += alpha_d * dz;
    zl += alpha_d * dzl;
    zu += alpha_d * dzu;
    // Keep multipliers within a broad neighborhood of the central path.
    const double kappa = 1e10;
    for (int i = 0; i < mI; ++i) z[i] = std::clamp(z[i], mu / (kappa * s[i]), kappa * mu / s[i]);
    for (int i = 0; i < n; ++i) {
      if (lb[i] > -kInf) {
        zl[i] = std::clamp(zl[i], mu / (kappa * (w[i] - lb[i])), kappa * mu / (w[i] - lb[i]));
      }
      if (ub[i] < kInf) {
        zu[i] = std::clamp(zu[i], mu / (kappa * (ub[i] - w[i])), kappa * mu / (ub[i] - w[i]));
      }
    }

    problem.eval_derivs(w, f, g, cE, JE, cI, JI, H);
    if (!finite(f) || !finite(g) || !finite(cE) || !finite(cI)) {
      best.message = "non-finite problem data";
      best.status = SolveStatus::numerical_failure;
      return best;
    }
  }

  if (best.constraint_violation <= options.acceptable_feas &&
      best.kkt_residual <= options.acceptable_kkt) {
    best.status = SolveStatus::converged_acceptable;
    if (best.message.empty()) best.message = "acceptable point at the iteration limit";
  } else {
    best.status = SolveStatus::infeasible_or_failed;
    if (best.message.empty()) best.message = "iteration limit reached";
  }
  return best;
}

}  // namespace platoon::nlp
