#include "platoon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "platoon/errors.hpp"

namespace platoon {

namespace {

Eigen::Vector2d closest_on_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                                   const Eigen::Vector2d& b)
{
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0) return a;
  const double t = std::clamp(ab.dot(p - a) / len2, 0.0, 1.0);
  return a + t * ab;
}

// Largest gap between the corner projections over the four face normals.
// Positive means disjoint.
double separating_gap(const std::array<Eigen::Vector2d, 4>& c1,
                      const std::array<Eigen::Vector2d, 4>& c2, const OrientedPolytope& P1,
                      const OrientedPolytope& P2)
{
  double best = -std::numeric_limits<double>::infinity();
  const auto project = [](const std::array<Eigen::Vector2d, 4>& cs, const Eigen::Vector2d& axis,
                          double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& c : cs) {
      const double d = axis.dot(c);
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  };
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector2d axis =
        (i < 2 ? P1.A.row(i) : P2.A.row(i - 2)).transpose();
    double lo1, hi1, lo2, hi2;
    project(c1, axis, lo1, hi1);
    project(c2, axis, lo2, hi2);
    best = std::max(best, std::max(lo2 - hi1, lo1 - hi2));
  }
  return best;
}

// Convex clip of a polygon by a halfspace a'p <= b (Sutherland-Hodgman).
std::vector<Eigen::Vector2d> clip_halfspace(const std::vector<Eigen::Vector2d>& poly,
                                            const Eigen::Vector2d& a, double b)
{
  std::vector<Eigen::Vector2d> out;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& p = poly[i];
    const Eigen::Vector2d& q = poly[(i + 1) % n];
    const double dp = a.dot(p) - b;
    const double dq = a.dot(q) - b;
    if (dp <= 0) out.push_back(p);
    if ((dp < 0 && dq > 0) || (dp > 0 && dq < 0)) {
      const double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

Eigen::Vector2d intersection_point(const OrientedPolytope& P1, const OrientedPolytope& P2)
{
  const auto c1 = P1.corners();
  std::vector<Eigen::Vector2d> poly(c1.begin(), c1.end());
  for (int i = 0; i < 4 && !poly.empty(); ++i) {
    poly = clip_halfspace(poly, P2.A.row(i).transpose(), P2.b[i]);
  }
  if (poly.empty()) {
    // Touching sets can clip to nothing under roundoff; fall back to the
    // closest boundary pair.
    Eigen::Vector2d best = P1.center();
    double best_d = std::numeric_limits<double>::infinity();
    const auto cs1 = P1.corners();
    const auto cs2 = P2.corners();
    for (const auto& p : cs1) {
      for (int e = 0; e < 4; ++e) {
        const Eigen::Vector2d q = closest_on_segment(p, cs2[e], cs2[(e + 1) % 4]);
        const double d = (p - q).norm();
        if (d < best_d) {
          best_d = d;
          best = (p + q) / 2;
        }
      }
    }
    return best;
  }
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& p : poly) sum += p;
  return sum / static_cast<double>(poly.size());
}

}  // namespace

FootprintJacobian footprint_jacobian(const VehicleState& z, const VehicleParams& params)
{
  (void)params;
  const double c = std::cos(z.psi);
  const double s = std::sin(z.psi);
  Eigen::Matrix<double, 4, 2> A;
  A << c, s, -s, c, -c, -s, s, -c;
  FootprintJacobian J;
  J.dA_dpsi << -s, c, -c, -s, s, -c, c, s;
  J.db_dz.col(0) = A.col(0);
  J.db_dz.col(1) = A.col(1);
  J.db_dz.col(2) = J.dA_dpsi * Eigen::Vector2d(z.x, z.y);
  return J;
}

DistanceResult polytope_distance(const OrientedPolytope& P1, const OrientedPolytope& P2)
{
  if (!P1.valid() || !P2.valid()) {
    throw std::invalid_argument("polytope_distance: malformed oriented polytope");
  }
  const auto c1 = P1.corners();
  const auto c2 = P2.corners();

  DistanceResult res;
  if (separating_gap(c1, c2, P1, P2) <= 0) {
    res.dist = 0;
    res.p1 = res.p2 = intersection_point(P1, P2);
    return res;
  }

  double best = std::numeric_limits<double>::infinity();
  const auto consider = [&](const Eigen::Vector2d& on1, const Eigen::Vector2d& on2) {
    const double d = (on1 - on2).norm();
    if (d < best) {
      best = d;
      res.p1 = on1;
      res.p2 = on2;
    }
  };
  for (int i = 0; i < 4; ++i) {
    for (int e = 0; e < 4; ++e) {
      consider(c1[i], closest_on_segment(c1[i], c2[e], c2[(e + 1) % 4]));
      consider(closest_on_segment(c2[i], c1[e], c1[(e + 1) % 4]), c2[i]);
    }
  }
  res.dist = best < 1e-9 ? 0.0 : best;
  return res;
}

double dual_value(const OrientedPolytope& P1, const OrientedPolytope& P2,
                  const DualCertificate& cert)
{
  const double neg_tol = 1e-12;
  if ((cert.lambda.array() < -neg_tol).any() || (cert.mu.array() < -neg_tol).any()) {
    throw invalid_certificate_error("dual_value: negative multiplier");
  }
  const double r1 = (P1.A.transpose() * cert.lambda + cert.s).norm();
  const double r2 = (P2.A.transpose() * cert.mu - cert.s).norm();
  if (r1 > 1e-6 || r2 > 1e-6) {
    throw invalid_certificate_error("dual_value: equality residual above tolerance");
  }
  if (cert.s.norm() > 1 + 1e-9) {
    throw invalid_certificate_error("dual_value: ||s|| exceeds 1");
  }
  return -P1.b.dot(cert.lambda) - P2.b.dot(cert.mu);
}

namespace {

// Multipliers supported on facets active at the witness point, solving
// A(active)' m = rhs with m >= 0.
std::optional<Eigen::Vector4d> active_multipliers(const OrientedPolytope& P,
                                                  const Eigen::Vector2d& witness,
                                                  const Eigen::Vector2d& rhs)
{
  std::vector<int> active;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(P.A.row(i).dot(witness) - P.b[i]) <= 1e-6) active.push_back(i);
  }
  double best_res = std::numeric_limits<double>::infinity();
  std::optional<Eigen::Vector4d> best;
  const auto try_subset = [&](const std::vector<int>& idx) {
    Eigen::MatrixXd M(2, static_cast<int>(idx.size()));
    for (size_t k = 0; k < idx.size(); ++k) M.col(static_cast<int>(k)) = P.A.row(idx[k]).transpose();
    const Eigen::VectorXd m = M.colPivHouseholderQr().solve(rhs);
    if ((m.array() < -1e-9).any()) return;
    const double res = (M * m - rhs).norm();
    if (res > 1e-8 || res >= best_res) return;
    Eigen::Vector4d full = Eigen::Vector4d::Zero();
    for (size_t k = 0; k < idx.size(); ++k) full[idx[k]] = std::max(m[static_cast<int>(k)], 0.0);
    best_res = res;
    best = full;
  };
  for (int i : active) try_subset({i});
  for (size_t i = 0; i < active.size(); ++i) {
    for (size_t j = i + 1; j < active.size(); ++j) try_subset({active[i], active[j]});
  }
  return best;
}

}  // namespace

std::optional<DualCertificate> separation_certificate(const OrientedPolytope& P1,
                                                      const OrientedPolytope& P2)
{
  const DistanceResult d = polytope_distance(P1, P2);
  if (d.dist <= 0) return std::nullopt;

  DualCertificate cert;
  cert.s = (d.p1 - d.p2) / d.dist;
  const auto lam = active_multipliers(P1, d.p1, -cert.s);
  const auto mu = active_multipliers(P2, d.p2, cert.s);
  if (!lam || !mu) {
    throw numerical_error("separation_certificate: active-set recovery failed");
  }
  cert.lambda = *lam;
  cert.mu = *mu;
  return cert;
}

}  // namespace platoon
