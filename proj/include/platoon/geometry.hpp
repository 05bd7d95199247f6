#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>

#include "platoon/dynamics.hpp"

namespace platoon {

/// Halfspace form A p <= b of an oriented rectangle. Rows of A are unit
/// normals and rows 3-4 are the negations of rows 1-2, so the set is the
/// box [-hx, hx] x [-hy, hy] rotated and translated.
template <typename Scalar>
struct OrientedPolytopeT {
  Eigen::Matrix<Scalar, 4, 2> A;
  Eigen::Matrix<Scalar, 4, 1> b;

  Eigen::Matrix<Scalar, 2, 1> center() const
  {
    const Eigen::Matrix<Scalar, 2, 1> a1 = A.row(0).transpose();
    const Eigen::Matrix<Scalar, 2, 1> a2 = A.row(1).transpose();
    return a1 * (b[0] - b[2]) / 2 + a2 * (b[1] - b[3]) / 2;
  }

  Eigen::Matrix<Scalar, 2, 1> half_extents() const
  {
    return Eigen::Matrix<Scalar, 2, 1>((b[0] + b[2]) / 2, (b[1] + b[3]) / 2);
  }

  /// Corner points in counterclockwise order.
  std::array<Eigen::Matrix<Scalar, 2, 1>, 4> corners() const
  {
    const Eigen::Matrix<Scalar, 2, 1> c = center();
    const Eigen::Matrix<Scalar, 2, 1> ex = A.row(0).transpose() * half_extents()[0];
    const Eigen::Matrix<Scalar, 2, 1> ey = A.row(1).transpose() * half_extents()[1];
    return {c + ex + ey, c - ex + ey, c - ex - ey, c + ex - ey};
  }

  bool valid(Scalar tol = Scalar(1e-6)) const;
};
using OrientedPolytope = OrientedPolytopeT<double>;

/// Rectangle of the given dimensions centered at (x, y) with heading psi.
template <typename Scalar>
OrientedPolytopeT<Scalar> oriented_box(Scalar x, Scalar y, Scalar psi, Scalar len, Scalar w)
{
  const Scalar c = std::cos(psi);
  const Scalar s = std::sin(psi);
  OrientedPolytopeT<Scalar> P;
  P.A << c, s, -s, c, -c, -s, s, -c;
  P.b << len / 2, w / 2, len / 2, w / 2;
  P.b += P.A * Eigen::Matrix<Scalar, 2, 1>(x, y);
  return P;
}

/// Road area occupied by a vehicle in a given state.
template <typename Scalar>
OrientedPolytopeT<Scalar> footprint(const VehicleStateT<Scalar>& z,
                                    const VehicleParamsT<Scalar>& params)
{
  return oriented_box(z.x, z.y, z.psi, params.len, params.w);
}

template <typename Scalar>
bool OrientedPolytopeT<Scalar>::valid(Scalar tol) const
{
  for (int i = 0; i < 2; ++i) {
    if (std::abs(A.row(i).norm() - 1) > tol) return false;
    if ((A.row(i + 2) + A.row(i)).norm() > tol) return false;
  }
  if (std::abs(A.row(0).dot(A.row(1))) > tol) return false;
  const Eigen::Matrix<Scalar, 2, 1> h = half_extents();
  return h[0] >= 0 && h[1] >= 0;
}

/// Derivatives of the footprint data with respect to the vehicle state.
/// db_dz columns are d(b)/d(x, y, psi); dA_dpsi is the elementwise heading
/// derivative of A.
struct FootprintJacobian {
  Eigen::Matrix<double, 4, 3> db_dz;
  Eigen::Matrix<double, 4, 2> dA_dpsi;
};
FootprintJacobian footprint_jacobian(const VehicleState& z, const VehicleParams& params);

struct DistanceResult {
  double dist = 0;
  Eigen::Vector2d p1 = Eigen::Vector2d::Zero();  ///< witness in P1
  Eigen::Vector2d p2 = Eigen::Vector2d::Zero();  ///< witness in P2
};

/// Euclidean distance between two rectangles, zero iff they intersect.
/// Exact: the minimum over vertex/edge pairs, with a separating-axis
/// intersection test. Distances below 1e-9 are reported as zero.
DistanceResult polytope_distance(const OrientedPolytope& P1, const OrientedPolytope& P2);

/// Feasible point of the dual of the set-distance problem; certifies
/// separation of at least the dual objective value.
struct DualCertificate {
  Eigen::Vector4d lambda = Eigen::Vector4d::Zero();
  Eigen::Vector4d mu = Eigen::Vector4d::Zero();
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
};

/// Dual objective -b1'lambda - b2'mu. Throws invalid_certificate_error if
/// the certificate violates dual feasibility (equality residual above 1e-6,
/// ||s|| above 1 + 1e-9, or negative multipliers).
double dual_value(const OrientedPolytope& P1, const OrientedPolytope& P2,
                  const DualCertificate& cert);

/// Optimal dual certificate recovered from the primal solution; its value
/// equals polytope_distance. Empty when the sets touch or intersect.
std::optional<DualCertificate> separation_certificate(const OrientedPolytope& P1,
                                                      const OrientedPolytope& P2);

}  // namespace platoon
