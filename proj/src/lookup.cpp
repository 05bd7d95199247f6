#include "platoon/lookup.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "platoon/errors.hpp"

namespace platoon {

using nlohmann::json;

std::string configuration_id(const PlatoonConfiguration& cfg)
{
  std::string canon = "nv=" + std::to_string(cfg.n_v) + ";l=";
  for (int li : cfg.l) canon += li ? '1' : '0';
  canon += ";p=";
  char buf[40];
  for (int r = 0; r < cfg.p.rows(); ++r) {
    for (int c = 0; c < cfg.p.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g,", cfg.p(r, c));
      canon += buf;
    }
  }
  // FNV-1a 64-bit over the canonical text
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::snprintf(buf, sizeof buf, "cfg-%016" PRIx64, h);
  return buf;
}

std::string ManeuverTable::resolve(const std::string& key) const
{
  if (configs.count(key)) return key;
  for (const auto& [id, reg] : configs) {
    if (!reg.name.empty() && reg.name == key) return id;
  }
  throw key_not_found_error("unknown configuration '" + key + "'");
}

const std::vector<ManeuverEntry>& query(const ManeuverTable& table, const std::string& ci,
                                        const std::string& cf)
{
  const std::string ci_id = table.resolve(ci);
  const std::string cf_id = table.resolve(cf);
  for (const auto& e : table.entries) {
    if (e.ci_id == ci_id && e.cf_id == cf_id) return e.family;
  }
  throw key_not_found_error("no table entry for pair (" + ci + ", " + cf + ")");
}

namespace {

bool states_match_pattern(const ConfiguredPlatoon& ci, const PlanningScene& scene)
{
  if (scene.initial_states.empty()) return false;
  const std::vector<Eigen::Vector2d> slots = expand(ci.cfg, scene.road, scene.params.front());
  double dx_min = std::numeric_limits<double>::infinity();
  double dx_max = -dx_min;
  for (size_t vi = 0; vi < scene.vehicle_ids.size(); ++vi) {
    const auto it = std::find(ci.vehicle_ids.begin(), ci.vehicle_ids.end(), scene.vehicle_ids[vi]);
    if (it == ci.vehicle_ids.end()) return false;
    const Eigen::Vector2d& slot = slots[it - ci.vehicle_ids.begin()];
    if (std::abs(scene.initial_states[vi].y - slot.y()) > 1e-6) return false;
    dx_min = std::min(dx_min, scene.initial_states[vi].x - slot.x());
    dx_max = std::max(dx_max, scene.initial_states[vi].x - slot.x());
  }
  return dx_max - dx_min <= 1e-6;
}

}  // namespace

ManeuverTable build_table(const std::vector<std::pair<NamedPlatoon, NamedPlatoon>>& pairs,
                          const std::vector<double>& rho_grid, const PlanningScene& scene,
                          const PlannerConfig& cfg, const BuildTableOptions& options)
{
  for (double r : rho_grid) {
    if (!(r > 0 && r < 1)) throw parse_error("rho grid values must lie in (0, 1)");
  }

  ManeuverTable table;
  table.max_entries = options.max_entries;

  struct Job {
    size_t pair_idx;
    double rho;
  };
  std::vector<Job> jobs;
  std::vector<std::string> ci_ids(pairs.size()), cf_ids(pairs.size());
  for (size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto& [nci, ncf] = pairs[pi];
    ci_ids[pi] = configuration_id(nci.platoon.cfg);
    cf_ids[pi] = configuration_id(ncf.platoon.cfg);
    table.configs.emplace(ci_ids[pi], RegisteredConfig{nci.name, nci.platoon});
    table.configs.emplace(cf_ids[pi], RegisteredConfig{ncf.name, ncf.platoon});

    std::vector<double> grid = rho_grid;
    std::sort(grid.begin(), grid.end());
    if (ci_ids[pi] == cf_ids[pi] && !grid.empty()) grid.resize(1);  // hold maneuver
    if (static_cast<int>(grid.size()) > options.max_entries) grid.resize(options.max_entries);
    for (double r : grid) jobs.push_back({pi, r});
  }

  std::vector<PlanResult> results(jobs.size());
  const auto run_job = [&](size_t ji) {
    const auto& [nci, ncf] = pairs[jobs[ji].pair_idx];
    PlannerConfig job_cfg = cfg;
    job_cfg.rho = jobs[ji].rho;
    PlanningScene job_scene = scene;
    if (!states_match_pattern(nci.platoon, scene)) job_scene.initial_states.clear();
    results[ji] = plan_maneuver(nci.platoon, ncf.platoon, job_scene, job_cfg);
  };

  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(jobs.size())));
  if (threads <= 1) {
    for (size_t ji = 0; ji < jobs.size(); ++ji) run_job(ji);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (size_t ji = next.fetch_add(1); ji < jobs.size(); ji = next.fetch_add(1)) run_job(ji);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (size_t pi = 0; pi < pairs.size(); ++pi) {
    TableEntry entry;
    entry.ci_id = ci_ids[pi];
    entry.cf_id = cf_ids[pi];
    for (size_t ji = 0; ji < jobs.size(); ++ji) {
      if (jobs[ji].pair_idx != pi) continue;
      if (results[ji].feasible()) {
        ManeuverEntry me;
        me.index = static_cast<int>(entry.family.size()) + 1;
        me.rho = jobs[ji].rho;
        me.trajectory = *results[ji].trajectory;
        me.trajectory.ci_id = entry.ci_id;
        me.trajectory.cf_id = entry.cf_id;
        entry.family.push_back(std::move(me));
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "rho=%g infeasible: ", jobs[ji].rho);
        entry.warnings.push_back(buf + results[ji].message);
      }
    }
    if (entry.family.empty()) {
      entry.warnings.insert(entry.warnings.begin(), "no feasible maneuver for this pair");
    }
    table.entries.push_back(std::move(entry));
  }
  return table;
}

namespace {

json state_arrays(const VehicleTrajectory& v, double dt)
{
  json j;
  j["id"] = v.id;
  j["len"] = v.params.len;
  j["w"] = v.params.w;
  j["lf"] = v.params.lf;
  j["lr"] = v.params.lr;
  j["rho"] = v.rho;
  json t = json::array(), x = json::array(), y = json::array(), psi = json::array(),
       vv = json::array(), a = json::array(), delta = json::array();
  for (size_t k = 0; k < v.states.size(); ++k) {
    t.push_back(static_cast<double>(k) * dt);
    x.push_back(v.states[k].x);
    y.push_back(v.states[k].y);
    psi.push_back(v.states[k].psi);
    vv.push_back(v.states[k].v);
  }
  for (const auto& u : v.inputs) {
    a.push_back(u.a);
    delta.push_back(u.delta);
  }
  j["t"] = std::move(t);
  j["x"] = std::move(x);
  j["y"] = std::move(y);
  j["psi"] = std::move(psi);
  j["v"] = std::move(vv);
  j["a"] = std::move(a);
  j["delta"] = std::move(delta);
  return j;
}

json obstacle_json(const OrientedPolytope& P)
{
  const Eigen::Vector2d c = P.center();
  const Eigen::Vector2d h = P.half_extents();
  json j;
  j["x"] = c[0];
  j["y"] = c[1];
  j["psi"] = std::atan2(P.A(0, 1), P.A(0, 0));
  j["len"] = 2 * h[0];
  j["w"] = 2 * h[1];
  return j;
}

json config_json(const RegisteredConfig& reg)
{
  json j;
  if (!reg.name.empty()) j["name"] = reg.name;
  j["n_v"] = reg.platoon.cfg.n_v;
  j["l"] = reg.platoon.cfg.l;
  json p = json::array();
  for (int r = 0; r < reg.platoon.cfg.p.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < reg.platoon.cfg.p.cols(); ++c) row.push_back(reg.platoon.cfg.p(r, c));
    p.push_back(std::move(row));
  }
  j["p"] = std::move(p);
  j["vehicle_ids"] = reg.platoon.vehicle_ids;
  return j;
}

RegisteredConfig config_from_json(const json& j)
{
  RegisteredConfig reg;
  reg.name = j.value("name", "");
  reg.platoon.cfg.n_v = j.at("n_v").get<int>();
  reg.platoon.cfg.l = j.at("l").get<std::vector<int>>();
  const auto& p = j.at("p");
  reg.platoon.cfg.p.resize(p.size(), reg.platoon.cfg.n_v);
  for (size_t r = 0; r < p.size(); ++r) {
    if (static_cast<int>(p[r].size()) != reg.platoon.cfg.n_v) {
      throw parse_error("configuration row length must equal n_v");
    }
    for (int c = 0; c < reg.platoon.cfg.n_v; ++c) reg.platoon.cfg.p(r, c) = p[r][c].get<double>();
  }
  reg.platoon.vehicle_ids = j.at("vehicle_ids").get<std::vector<std::string>>();
  return reg;
}

OrientedPolytope obstacle_from_json(const json& j)
{
  return oriented_box(j.at("x").get<double>(), j.at("y").get<double>(), j.value("psi", 0.0),
                      j.at("len").get<double>(), j.at("w").get<double>());
}

}  // namespace

void save_table(const ManeuverTable& table, const std::string& path)
{
  json j;
  j["format_version"] = table.format_version;
  j["max_entries"] = table.max_entries;
  json configs = json::object();
  for (const auto& [id, reg] : table.configs) configs[id] = config_json(reg);
  j["configs"] = std::move(configs);
  json entries = json::array();
  for (const auto& e : table.entries) {
    json je;
    je["ci"] = e.ci_id;
    je["cf"] = e.cf_id;
    je["warnings"] = e.warnings;
    json family = json::array();
    for (const auto& m : e.family) {
      json jm;
      jm["index"] = m.index;
      jm["rho"] = m.rho;
      jm["d_min"] = m.trajectory.d_min;
      jm["dt"] = m.trajectory.dt;
      jm["v_max"] = m.trajectory.v_max;
      json obstacles = json::array();
      for (const auto& o : m.trajectory.obstacles) obstacles.push_back(obstacle_json(o));
      jm["obstacles"] = std::move(obstacles);
      json vehicles = json::array();
      for (const auto& v : m.trajectory.vehicles) vehicles.push_back(state_arrays(v, m.trajectory.dt));
      jm["vehicles"] = std::move(vehicles);
      family.push_back(std::move(jm));
    }
    je["maneuvers"] = std::move(family);
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);

  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
}

ManeuverTable load_table(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw parse_error("cannot read '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw parse_error("malformed table file '" + path + "': " + e.what());
  }

  ManeuverTable table;
  try {
    table.format_version = j.at("format_version").get<int>();
    table.max_entries = j.value("max_entries", 9);
    for (const auto& [id, jc] : j.at("configs").items()) {
      table.configs.emplace(id, config_from_json(jc));
    }
    for (const auto& je : j.at("entries")) {
      TableEntry e;
      e.ci_id = je.at("ci").get<std::string>();
      e.cf_id = je.at("cf").get<std::string>();
      e.warnings = je.value("warnings", std::vector<std::string>{});
      for (const auto& jm : je.at("maneuvers")) {
        ManeuverEntry m;
        m.index = jm.at("index").get<int>();
        m.rho = jm.at("rho").get<double>();
        m.trajectory.rho = m.rho;
        m.trajectory.d_min = jm.at("d_min").get<double>();
        m.trajectory.dt = jm.at("dt").get<double>();
        m.trajectory.v_max = jm.value("v_max", 0.0);
        m.trajectory.ci_id = e.ci_id;
        m.trajectory.cf_id = e.cf_id;
        for (const auto& jo : jm.at("obstacles")) {
          m.trajectory.obstacles.push_back(obstacle_from_json(jo));
        }
        for (const auto& jv : jm.at("vehicles")) {
          VehicleTrajectory v;
          v.id = jv.at("id").get<std::string>();
          v.params = VehicleParams{jv.at("len").get<double>(), jv.at("w").get<double>(),
                                   jv.at("lf").get<double>(), jv.at("lr").get<double>()};
          v.rho = jv.value("rho", m.rho);
          const auto x = jv.at("x").get<std::vector<double>>();
          const auto y = jv.at("y").get<std::vector<double>>();
          const auto psi = jv.at("psi").get<std::vector<double>>();
          const auto vel = jv.at("v").get<std::vector<double>>();
          const auto a = jv.at("a").get<std::vector<double>>();
          const auto delta = jv.at("delta").get<std::vector<double>>();
          if (x.size() != y.size() || x.size() != psi.size() || x.size() != vel.size() ||
              a.size() != delta.size() || a.size() + 1 != x.size()) {
            throw parse_error("inconsistent trajectory arrays for vehicle '" + v.id + "'");
          }
          for (size_t k = 0; k < x.size(); ++k) {
            v.states.push_back(VehicleState{x[k], y[k], psi[k], vel[k]});
          }
          for (size_t k = 0; k < a.size(); ++k) {
            v.inputs.push_back(ControlInput{a[k], delta[k]});
          }
          m.trajectory.vehicles.push_back(std::move(v));
        }
        e.family.push_back(std::move(m));
      }
      table.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw parse_error("malformed table file '" + path + "': " + e.what());
  }
  return table;
}

}  // namespace platoon
