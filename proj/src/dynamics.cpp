#include "platoon/dynamics.hpp"

namespace platoon {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Limits Limits::defaults(double dt)
{
  Limits lim;
  lim.z_min << -kInf, -kInf, -kInf, 0.0;
  lim.z_max << kInf, kInf, kInf, kInf;
  lim.u_min << -4.0, -0.3;
  lim.u_max << 4.0, 0.3;
  lim.du_min << -1.0 * dt, -0.2 * dt;
  lim.du_max << 1.0 * dt, 0.2 * dt;
  return lim;
}

bool Limits::valid() const
{
  return (z_min.array() <= z_max.array()).all() && (u_min.array() <= u_max.array()).all() &&
         (du_min.array() <= du_max.array()).all();
}

}  // namespace platoon
