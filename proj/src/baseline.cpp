#include "platoon/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "platoon/errors.hpp"
#include "platoon/geometry.hpp"
#include "platoon/nlp.hpp"

namespace platoon {

using nlohmann::json;

int FleetSnapshot::index_of(const std::string& id) const
{
  for (size_t i = 0; i < ids->size(); ++i) {
    if ((*ids)[i] == id) return static_cast<int>(i);
  }
  throw key_not_found_error("unknown vehicle '" + id + "'");
}

namespace {

PrimitiveKind kind_from_string(const std::string& s)
{
  if (s == "slow_down") return PrimitiveKind::slow_down;
  if (s == "cruise") return PrimitiveKind::cruise;
  if (s == "lane_change") return PrimitiveKind::lane_change;
  if (s == "acc") return PrimitiveKind::acc;
  throw parse_error("unknown primitive kind '" + s + "'");
}

Trigger trigger_from_json(const json& j)
{
  Trigger t;
  const std::string kind = j.at("type").get<std::string>();
  if (kind == "time") {
    t.kind = Trigger::Kind::time;
    t.at_time = j.at("t").get<double>();
  } else if (kind == "gap_ge") {
    t.kind = Trigger::Kind::gap_ge;
    t.a = j.at("a").get<std::string>();
    t.b = j.at("b").get<std::string>();
    t.threshold = j.at("threshold").get<double>();
  } else if (kind == "in_lane") {
    t.kind = Trigger::Kind::in_lane;
    t.vehicle = j.at("vehicle").get<std::string>();
    t.lane = j.at("lane").get<int>();
    t.tol = j.value("tol", 0.2);
  } else {
    throw parse_error("unknown trigger type '" + kind + "'");
  }
  return t;
}

}  // namespace

PrimitiveSchedule load_schedule(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw parse_error("cannot read '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw parse_error("malformed schedule file '" + path + "': " + e.what());
  }

  PrimitiveSchedule sched;
  try {
    for (const auto& jv : j.at("schedule")) {
      sched.vehicle_ids.push_back(jv.at("vehicle_id").get<std::string>());
      std::vector<ScheduledPrimitive> list;
      for (const auto& jp : jv.at("primitives")) {
        ScheduledPrimitive sp;
        sp.trigger = trigger_from_json(jp.at("trigger"));
        sp.primitive.kind = kind_from_string(jp.at("kind").get<std::string>());
        sp.primitive.v_des = jp.value("v_des", 0.0);
        sp.primitive.decel = jp.value("decel", 0.0);
        sp.primitive.lane = jp.value("lane", 1);
        sp.primitive.accel = jp.value("accel", 0.0);
        sp.primitive.front_id = jp.value("front", "");
        sp.primitive.gap_des = jp.value("gap", 0.0);
        list.push_back(std::move(sp));
      }
      if (list.empty()) throw parse_error("vehicle without primitives in schedule");
      if (list.front().trigger.kind != Trigger::Kind::time || list.front().trigger.at_time != 0) {
        throw parse_error("the first primitive of each vehicle must trigger at t = 0");
      }
      sched.primitives.push_back(std::move(list));
    }
  } catch (const json::exception& e) {
    throw parse_error("malformed schedule file '" + path + "': " + e.what());
  }
  return sched;
}

namespace {

struct PrimitiveReference {
  std::vector<VehicleState> window;
  Eigen::Vector4d Qz;
  Limits limits;
};

PrimitiveReference synthesize(const VehicleParams& params, const VehicleState& z,
                              const MotionPrimitive& prim, const FleetSnapshot& env,
                              const RoadGeometry& road, const FollowerConfig& cfg)
{
  PrimitiveReference ref;
  ref.Qz = cfg.Qz;
  ref.limits = cfg.limits;
  ref.window.resize(cfg.N + 1);

  double v_ref = z.v;
  double y_ref = road.lane_center(road.nearest_lane(z.y));
  double x0 = z.x;
  double v_traj = z.v;  // speed used to advance the x reference

  switch (prim.kind) {
    case PrimitiveKind::cruise:
      v_ref = prim.v_des;
      v_traj = prim.v_des;
      ref.Qz[0] = 0;  // speed tracking drives x
      break;
    case PrimitiveKind::slow_down:
      v_ref = prim.v_des;
      v_traj = prim.v_des;
      ref.Qz[0] = 0;
      if (prim.decel > 0) ref.limits.u_min[0] = std::max(ref.limits.u_min[0], -prim.decel);
      break;
    case PrimitiveKind::lane_change:
      y_ref = road.lane_center(prim.lane);
      v_traj = z.v;
      ref.Qz[0] = 0;
      if (prim.accel > 0) {
        ref.limits.u_min[0] = std::max(ref.limits.u_min[0], -prim.accel);
        ref.limits.u_max[0] = std::min(ref.limits.u_max[0], prim.accel);
      }
      break;
    case PrimitiveKind::acc: {
      const int fi = env.index_of(prim.front_id);
      const VehicleState& front = (*env.states)[fi];
      const double offset =
          prim.gap_des + ((*env.params)[fi].len + params.len) / 2;
      v_ref = front.v;
      v_traj = front.v;
      x0 = front.x - offset;
      y_ref = road.lane_center(road.nearest_lane(z.y));
      break;
    }
  }

  for (int k = 0; k <= cfg.N; ++k) {
    VehicleState r;
    r.x = x0 + v_traj * cfg.dt * k;
    r.y = y_ref;
    r.psi = 0;
    r.v = v_ref;
    ref.window[k] = r;
  }
  return ref;
}

}  // namespace

ControlInput primitive_step(const VehicleParams& params, const VehicleState& z,
                            const ControlInput& u_prev, const MotionPrimitive& prim,
                            const FleetSnapshot& env, const RoadGeometry& road,
                            const FollowerConfig& cfg)
{
  const PrimitiveReference ref = synthesize(params, z, prim, env, road, cfg);

  FollowerConfig step_cfg = cfg;
  step_cfg.Qz = ref.Qz;
  step_cfg.limits = ref.limits;
  const FollowStepResult res = follow_step(params, z, u_prev, ref.window, step_cfg);
  if (!res.ok) {
    throw numerical_error("primitive controller failed: " + res.message);
  }
  return res.u;
}

namespace {

}  // namespace

ScheduleRunResult run_schedule(const PrimitiveSchedule& schedule,
                               const std::vector<std::string>& ids,
                               const std::vector<VehicleParams>& params,
                               const std::vector<VehicleState>& initial_states,
                               const RoadGeometry& road, const FollowerConfig& cfg, int T)
{
  ScheduleRunResult out;
  const int V = static_cast<int>(ids.size());
  if (schedule.vehicle_ids.size() != ids.size()) {
    throw parse_error("schedule does not cover the whole fleet");
  }
  std::vector<int> sched_of(V, -1);
  for (int i = 0; i < V; ++i) {
    for (size_t s = 0; s < schedule.vehicle_ids.size(); ++s) {
      if (schedule.vehicle_ids[s] == ids[i]) sched_of[i] = static_cast<int>(s);
    }
    if (sched_of[i] < 0) throw parse_error("no schedule for vehicle '" + ids[i] + "'");
  }

  std::vector<VehicleState> z = initial_states;
  std::vector<ControlInput> prev(V);
  std::vector<int> active(V, 0);
  std::vector<std::vector<VehicleState>> states(V);
  std::vector<std::vector<ControlInput>> inputs(V);
  for (int i = 0; i < V; ++i) states[i].push_back(z[i]);

  const auto fires = [&](const Trigger& trig, double time, const FleetSnapshot& env) {
    switch (trig.kind) {
      case Trigger::Kind::time:
        return time >= trig.at_time - 1e-12;
      case Trigger::Kind::gap_ge: {
        const int a = env.index_of(trig.a);
        const int b = env.index_of(trig.b);
        return polytope_distance(footprint((*env.states)[a], (*env.params)[a]),
                                 footprint((*env.states)[b], (*env.params)[b]))
                   .dist >= trig.threshold;
      }
      case Trigger::Kind::in_lane: {
        const int i = env.index_of(trig.vehicle);
        return std::abs((*env.states)[i].y - road.lane_center(trig.lane)) <= trig.tol &&
               std::abs((*env.states)[i].psi) <= 0.05;
      }
    }
    return false;
  };

  for (int t = 0; t < T; ++t) {
    const FleetSnapshot env{&ids, &params, &z};
    const double time = t * cfg.dt;
    // advance active primitives (in order, sticky)
    for (int i = 0; i < V; ++i) {
      const auto& list = schedule.primitives[sched_of[i]];
      while (active[i] + 1 < static_cast<int>(list.size()) &&
             fires(list[active[i] + 1].trigger, time, env)) {
        ++active[i];
      }
    }
    std::vector<ControlInput> u(V);
    for (int i = 0; i < V; ++i) {
      const auto& prim = schedule.primitives[sched_of[i]][active[i]].primitive;
      u[i] = primitive_step(params[i], z[i], prev[i], prim, env, road, cfg);
    }
    for (int i = 0; i < V; ++i) {
      z[i] = step(params[i], z[i], u[i], cfg.dt);
      states[i].push_back(z[i]);
      inputs[i].push_back(u[i]);
      out.min_speed = std::min(out.min_speed, z[i].v);
    }
    prev = u;
  }

  out.trajectory.rho = 0;
  out.trajectory.d_min = 0;
  out.trajectory.dt = cfg.dt;
  out.trajectory.vehicles.resize(V);
  for (int i = 0; i < V; ++i) {
    out.trajectory.vehicles[i] =
        VehicleTrajectory{ids[i], params[i], std::move(states[i]), std::move(inputs[i]), 0.0};
  }
  for (int t = 0; t <= T; ++t) {
    for (int i = 0; i < V; ++i) {
      for (int j = i + 1; j < V; ++j) {
        const double d =
            polytope_distance(footprint(out.trajectory.vehicles[i].states[t], params[i]),
                              footprint(out.trajectory.vehicles[j].states[t], params[j]))
                .dist;
        out.min_pair_distance = std::min(out.min_pair_distance, d);
      }
    }
  }
  for (int i = 0; i < V; ++i) {
    out.active_primitive_at_end.push_back(active[i]);
  }
  return out;
}

}  // namespace platoon
