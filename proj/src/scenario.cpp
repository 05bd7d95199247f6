#include "platoon/scenario.hpp"

#include <fstream>

#include <json.hpp>

#include "platoon/errors.hpp"
#include "platoon/geometry.hpp"

namespace platoon {

using nlohmann::json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double number_or_inf(const json& j, double fallback)
{
  if (j.is_null()) return fallback;
  return j.get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> vector_with_inf(const json& j, const Eigen::Matrix<double, N, 1>& dflt,
                                            double inf_sign)
{
  if (j.is_null()) return dflt;
  if (!j.is_array() || j.size() != N) throw parse_error("limit arrays must have fixed length");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = number_or_inf(j[i], inf_sign * kInf);
  return out;
}

}  // namespace

RateLimits RateLimits::defaults()
{
  RateLimits r;
  r.z_min << -kInf, -kInf, -kInf, 0.0;
  r.z_max << kInf, kInf, kInf, kInf;
  r.u_min << -4.0, -0.3;
  r.u_max << 4.0, 0.3;
  r.du_per_s_min << -1.0, -0.2;
  r.du_per_s_max << 1.0, 0.2;
  return r;
}

Limits RateLimits::at_dt(double dt) const
{
  Limits lim;
  lim.z_min = z_min;
  lim.z_max = z_max;
  lim.u_min = u_min;
  lim.u_max = u_max;
  lim.du_min = du_per_s_min * dt;
  lim.du_max = du_per_s_max * dt;
  return lim;
}

PlanningScene Scenario::scene() const
{
  PlanningScene s;
  s.road = road;
  s.vehicle_ids = vehicle_ids;
  s.params = params;
  s.initial_states = initial_states;
  s.obstacles = obstacles;
  return s;
}

const ConfiguredPlatoon& Scenario::configuration(const std::string& name) const
{
  const auto it = configurations.find(name);
  if (it == configurations.end()) {
    throw key_not_found_error("scenario has no configuration named '" + name + "'");
  }
  return it->second;
}

Scenario load_scenario(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw parse_error("cannot read '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw parse_error("malformed scenario file '" + path + "': " + e.what());
  }

  Scenario sc;
  try {
    if (j.contains("road")) {
      sc.road.n_lanes = j["road"].value("n_lanes", 3);
      sc.road.lane_width = j["road"].value("lane_width", 3.7);
    }

    VehicleParams common;
    if (j.contains("vehicle")) {
      const auto& jv = j["vehicle"];
      common.len = jv.value("len", 4.5);
      common.w = jv.value("w", 1.8);
      common.lf = jv.value("lf", common.len * 0.3);
      common.lr = jv.value("lr", common.len * 0.3);
    }
    if (!common.valid()) throw parse_error("invalid vehicle dimensions");

    for (const auto& jf : j.at("fleet")) {
      sc.vehicle_ids.push_back(jf.at("id").get<std::string>());
      VehicleParams p = common;
      p.len = jf.value("len", p.len);
      p.w = jf.value("w", p.w);
      sc.params.push_back(p);
      sc.initial_states.push_back(VehicleState{jf.at("x").get<double>(), jf.at("y").get<double>(),
                                               jf.value("psi", 0.0), jf.value("v", 0.0)});
    }
    if (sc.vehicle_ids.empty()) throw parse_error("scenario fleet is empty");

    sc.limits = RateLimits::defaults();
    if (j.contains("limits")) {
      const auto& jl = j["limits"];
      sc.limits.z_min = vector_with_inf<4>(jl.value("z_min", json()), sc.limits.z_min, -1);
      sc.limits.z_max = vector_with_inf<4>(jl.value("z_max", json()), sc.limits.z_max, +1);
      sc.limits.u_min = vector_with_inf<2>(jl.value("u_min", json()), sc.limits.u_min, -1);
      sc.limits.u_max = vector_with_inf<2>(jl.value("u_max", json()), sc.limits.u_max, +1);
      sc.limits.du_per_s_min =
          vector_with_inf<2>(jl.value("du_per_s_min", json()), sc.limits.du_per_s_min, -1);
      sc.limits.du_per_s_max =
          vector_with_inf<2>(jl.value("du_per_s_max", json()), sc.limits.du_per_s_max, +1);
    }

    const auto& jp = j.at("planner");
    sc.planner.N = jp.value("N", 5);
    sc.planner.dt = jp.at("dt").get<double>();
    sc.planner.T = jp.at("T").get<int>();
    sc.planner.d_min = jp.at("d_min").get<double>();
    sc.planner.v_max = jp.at("v_max").get<double>();
    sc.planner.rho = jp.value("rho", 0.25);
    if (jp.contains("Qz")) {
      for (int i = 0; i < 4; ++i) sc.planner.Qz[i] = jp["Qz"][i].get<double>();
    }
    if (jp.contains("Qu")) {
      for (int i = 0; i < 2; ++i) sc.planner.Qu[i] = jp["Qu"][i].get<double>();
    }
    if (jp.contains("Qdu")) {
      for (int i = 0; i < 2; ++i) sc.planner.Qdu[i] = jp["Qdu"][i].get<double>();
    }
    sc.planner.kkt_tol = jp.value("kkt_tol", 1e-6);
    sc.planner.max_iter = jp.value("max_iter", 300);
    sc.planner.limits = sc.limits.at_dt(sc.planner.dt);
    if (sc.planner.N >= sc.planner.T) {
      throw parse_error("planner horizon N must be shorter than the maneuver length T");
    }

    sc.follower.N = sc.planner.N;
    sc.follower.dt = sc.planner.dt;
    sc.follower.Qz = sc.planner.Qz;
    sc.follower.Qu = sc.planner.Qu;
    sc.follower.Qdu = sc.planner.Qdu;
    sc.follower.kkt_tol = sc.planner.kkt_tol;
    if (j.contains("follower")) {
      const auto& jf = j["follower"];
      sc.has_follower = true;
      sc.follower.N = jf.value("N", sc.follower.N);
      sc.follower.dt = jf.value("dt", sc.follower.dt);
      if (jf.contains("Qz")) {
        for (int i = 0; i < 4; ++i) sc.follower.Qz[i] = jf["Qz"][i].get<double>();
      }
      if (jf.contains("Qu")) {
        for (int i = 0; i < 2; ++i) sc.follower.Qu[i] = jf["Qu"][i].get<double>();
      }
      if (jf.contains("Qdu")) {
        for (int i = 0; i < 2; ++i) sc.follower.Qdu[i] = jf["Qdu"][i].get<double>();
      }
      sc.follower.kkt_tol = jf.value("kkt_tol", sc.follower.kkt_tol);
    }
    sc.follower.limits = sc.limits.at_dt(sc.follower.dt);

    if (j.contains("configurations")) {
      for (const auto& [name, jc] : j["configurations"].items()) {
        ConfiguredPlatoon cp;
        cp.cfg.n_v = jc.at("n_v").get<int>();
        cp.cfg.l = jc.at("l").get<std::vector<int>>();
        const auto& p = jc.at("p");
        cp.cfg.p.resize(p.size(), cp.cfg.n_v);
        for (size_t r = 0; r < p.size(); ++r) {
          if (static_cast<int>(p[r].size()) != cp.cfg.n_v) {
            throw parse_error("configuration '" + name + "': p rows must have n_v entries");
          }
          for (int c = 0; c < cp.cfg.n_v; ++c) cp.cfg.p(r, c) = p[r][c].get<double>();
        }
        cp.vehicle_ids = jc.at("vehicle_ids").get<std::vector<std::string>>();
        cp.cfg.validate();
        if (cp.cfg.total_vehicles() != static_cast<int>(cp.vehicle_ids.size())) {
          throw parse_error("configuration '" + name +
                            "': vehicle_ids must cover every slot in canonical order");
        }
        sc.configurations.emplace(name, std::move(cp));
      }
    }

    if (j.contains("pairs")) {
      for (const auto& pr : j["pairs"]) {
        if (!pr.is_array() || pr.size() != 2) throw parse_error("pairs must be [ci, cf] names");
        sc.pairs.emplace_back(pr[0].get<std::string>(), pr[1].get<std::string>());
      }
    }
    for (const auto& [ci, cf] : sc.pairs) {
      sc.configuration(ci);
      sc.configuration(cf);
    }

    sc.rho_grid = j.value("rho_grid", std::vector<double>{sc.planner.rho});

    if (j.contains("obstacles")) {
      for (const auto& jo : j["obstacles"]) {
        sc.obstacles.push_back(oriented_box(jo.at("x").get<double>(), jo.at("y").get<double>(),
                                            jo.value("psi", 0.0), jo.at("len").get<double>(),
                                            jo.at("w").get<double>()));
      }
    }
    sc.traffic_path = j.value("traffic", "");
  } catch (const json::exception& e) {
    throw parse_error("malformed scenario file '" + path + "': " + e.what());
  }
  return sc;
}

}  // namespace platoon
