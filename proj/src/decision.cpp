#include "platoon/decision.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "platoon/errors.hpp"
#include "platoon/geometry.hpp"

namespace platoon {

using nlohmann::json;

std::vector<SharedPlan> load_traffic(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw parse_error("cannot read '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw parse_error("malformed traffic file '" + path + "': " + e.what());
  }
  if (!j.is_array()) throw parse_error("traffic file must be a list of shared plans");

  std::vector<SharedPlan> plans;
  try {
    for (const auto& jp : j) {
      SharedPlan p;
      p.vehicle_id = jp.at("vehicle_id").get<std::string>();
      p.len = jp.at("len").get<double>();
      p.w = jp.at("w").get<double>();
      for (const auto& js : jp.at("states")) {
        p.t.push_back(js.at("t").get<double>());
        p.states.push_back(VehicleState{js.at("x").get<double>(), js.at("y").get<double>(),
                                        js.value("psi", 0.0), js.value("v", 0.0)});
      }
      if (!std::is_sorted(p.t.begin(), p.t.end())) {
        throw parse_error("shared plan '" + p.vehicle_id + "' has unsorted time stamps");
      }
      plans.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw parse_error("malformed traffic file '" + path + "': " + e.what());
  }
  return plans;
}

std::vector<VehicleState> sample_plan(const SharedPlan& plan, double dt, int T)
{
  if (plan.t.empty() || plan.t.front() > 1e-9 || plan.t.back() < T * dt - 1e-9) {
    throw insufficient_horizon_error("shared plan '" + plan.vehicle_id +
                                     "' does not cover the maneuver horizon");
  }
  std::vector<VehicleState> out(static_cast<size_t>(T) + 1);
  size_t seg = 0;
  for (int k = 0; k <= T; ++k) {
    const double t = std::min(k * dt, plan.t.back());
    while (seg + 2 < plan.t.size() && plan.t[seg + 1] < t) ++seg;
    const double t0 = plan.t[seg];
    const double t1 = plan.t[seg + 1];
    const double frac = t1 > t0 ? std::clamp((t - t0) / (t1 - t0), 0.0, 1.0) : 0.0;
    const VehicleState& z0 = plan.states[seg];
    const VehicleState& z1 = plan.states[seg + 1];
    VehicleState z;
    z.x = z0.x + frac * (z1.x - z0.x);
    z.y = z0.y + frac * (z1.y - z0.y);
    z.psi = wrap_angle(z0.psi + frac * wrap_angle(z1.psi - z0.psi));
    z.v = z0.v + frac * (z1.v - z0.v);
    out[k] = z;
  }
  return out;
}

bool collision_check(const std::vector<VehicleState>& traj1, double len1, double w1,
                     const std::vector<VehicleState>& traj2, double len2, double w2,
                     double d_min)
{
  if (traj2.size() < traj1.size()) {
    throw insufficient_horizon_error("second trajectory is shorter than the first");
  }
  for (size_t t = 0; t < traj1.size(); ++t) {
    const OrientedPolytope P1 = oriented_box(traj1[t].x, traj1[t].y, traj1[t].psi, len1, w1);
    const OrientedPolytope P2 = oriented_box(traj2[t].x, traj2[t].y, traj2[t].psi, len2, w2);
    if (polytope_distance(P1, P2).dist < d_min) return true;
  }
  return false;
}

DecisionResult decide(const ManeuverTable& table, const std::string& ci, const std::string& cf,
                      const std::vector<SharedPlan>& shared,
                      std::optional<double> d_min_override)
{
  const auto& family = query(table, ci, cf);
  DecisionResult out;
  for (const auto& entry : family) {
    const double d_min = d_min_override.value_or(entry.trajectory.d_min);
    const int T = entry.trajectory.horizon();

    bool blocked = false;
    for (const auto& plan : shared) {
      const std::vector<VehicleState> plan_states =
          sample_plan(plan, entry.trajectory.dt, T);
      for (const auto& veh : entry.trajectory.vehicles) {
        if (collision_check(veh.states, veh.params.len, veh.params.w, plan_states, plan.len,
                            plan.w, d_min)) {
          blocked = true;
          break;
        }
      }
      if (blocked) break;
    }
    if (!blocked) {
      out.feasible = true;
      out.index = entry.index;
      out.rho = entry.rho;
      out.entry = &entry;
      return out;
    }
  }
  return out;
}

}  // namespace platoon
