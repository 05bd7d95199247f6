#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numbers>

namespace platoon {

/// Wrap an angle to (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a)
{
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  a = std::fmod(a + pi, 2 * pi);
  if (a <= Scalar(0)) a += 2 * pi;
  return a - pi;
}

template <typename Scalar>
struct VehicleParamsT {
  Scalar len{4.5};  ///< overall length [m]
  Scalar w{1.8};    ///< overall width [m]
  Scalar lf{1.35};  ///< C.G. to front axle [m]
  Scalar lr{1.35};  ///< C.G. to rear axle [m]

  Scalar wheelbase() const { return lf + lr; }
  bool valid() const { return len > 0 && w > 0 && lf > 0 && lr > 0 && lf + lr <= len; }
};
using VehicleParams = VehicleParamsT<double>;

/// State z = [x, y, psi, v] at the vehicle's center of gravity.
template <typename Scalar>
struct VehicleStateT {
  Scalar x{0};
  Scalar y{0};
  Scalar psi{0};
  Scalar v{0};

  Eigen::Matrix<Scalar, 4, 1> vec() const
  {
    return Eigen::Matrix<Scalar, 4, 1>(x, y, psi, v);
  }
  static VehicleStateT from_vec(const Eigen::Matrix<Scalar, 4, 1>& z)
  {
    return VehicleStateT{z[0], z[1], z[2], z[3]};
  }
};
using VehicleState = VehicleStateT<double>;

/// Input u = [a, delta]: longitudinal acceleration and front steering angle.
template <typename Scalar>
struct ControlInputT {
  Scalar a{0};
  Scalar delta{0};

  Eigen::Matrix<Scalar, 2, 1> vec() const
  {
    return Eigen::Matrix<Scalar, 2, 1>(a, delta);
  }
  static ControlInputT from_vec(const Eigen::Matrix<Scalar, 2, 1>& u)
  {
    return ControlInputT{u[0], u[1]};
  }
};
using ControlInput = ControlInputT<double>;

/// Componentwise state and input boxes plus per-step input-rate bounds.
/// Rate limits quoted per second must be scaled by the sampling time before
/// they are stored here (see defaults()).
struct Limits {
  Eigen::Vector4d z_min;
  Eigen::Vector4d z_max;
  Eigen::Vector2d u_min;
  Eigen::Vector2d u_max;
  Eigen::Vector2d du_min;  ///< per-step lower rate bound
  Eigen::Vector2d du_max;  ///< per-step upper rate bound

  /// Passenger-vehicle defaults: a in [-4, 4] m/s^2 with rate 1 m/s^3,
  /// delta in [-0.3, 0.3] rad with rate 0.2 rad/s, v >= 0.
  static Limits defaults(double dt);

  bool valid() const;
};

/// Side slip angle at the C.G. for a given front steering angle.
template <typename Scalar>
Scalar side_slip(const VehicleParamsT<Scalar>& params, Scalar delta)
{
  return std::atan(std::tan(delta) * params.lr / params.wheelbase());
}

/// One forward-Euler step of the kinematic bicycle model. The heading is
/// wrapped to (-pi, pi] after the update.
template <typename Scalar>
VehicleStateT<Scalar> step(const VehicleParamsT<Scalar>& params, const VehicleStateT<Scalar>& z,
                           const ControlInputT<Scalar>& u, Scalar dt)
{
  const Scalar beta = side_slip(params, u.delta);
  VehicleStateT<Scalar> out;
  out.x = z.x + dt * z.v * std::cos(z.psi + beta);
  out.y = z.y + dt * z.v * std::sin(z.psi + beta);
  out.psi = wrap_angle(z.psi + dt * z.v * std::cos(beta) * std::tan(u.delta) / params.wheelbase());
  out.v = z.v + dt * u.a;
  return out;
}

/// First derivatives of step() with respect to state and input. The heading
/// wrap is ignored (its derivative is 1 away from the branch cut).
template <typename Scalar>
void step_jacobians(const VehicleParamsT<Scalar>& params, const VehicleStateT<Scalar>& z,
                    const ControlInputT<Scalar>& u, Scalar dt,
                    Eigen::Matrix<Scalar, 4, 4>& A, Eigen::Matrix<Scalar, 4, 2>& B)
{
  const Scalar L = params.wheelbase();
  const Scalar ratio = params.lr / L;
  const Scalar tan_d = std::tan(u.delta);
  const Scalar sec2_d = Scalar(1) + tan_d * tan_d;
  const Scalar beta = std::atan(tan_d * ratio);
  const Scalar dbeta = ratio * sec2_d / (Scalar(1) + ratio * ratio * tan_d * tan_d);
  const Scalar ch = std::cos(z.psi + beta);
  const Scalar sh = std::sin(z.psi + beta);
  const Scalar cb = std::cos(beta);
  const Scalar sb = std::sin(beta);

  A.setIdentity();
  A(0, 2) = -dt * z.v * sh;
  A(0, 3) = dt * ch;
  A(1, 2) = dt * z.v * ch;
  A(1, 3) = dt * sh;
  A(2, 3) = dt * cb * tan_d / L;

  B.setZero();
  B(0, 1) = -dt * z.v * sh * dbeta;
  B(1, 1) = dt * z.v * ch * dbeta;
  B(2, 1) = dt * z.v * (cb * sec2_d - sb * dbeta * tan_d) / L;
  B(3, 0) = dt;
}

}  // namespace platoon
