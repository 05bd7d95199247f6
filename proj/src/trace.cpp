#include "platoon/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "platoon/errors.hpp"
#include "platoon/geometry.hpp"

namespace platoon {

std::vector<TraceRow> trace_rows(const FleetTrajectory& traj)
{
  std::vector<TraceRow> rows;
  const int T = traj.horizon();
  rows.reserve(static_cast<size_t>(T + 1) * traj.vehicles.size());
  for (int t = 0; t <= T; ++t) {
    for (const auto& v : traj.vehicles) {
      TraceRow r;
      r.t = t * traj.dt;
      r.vehicle_id = v.id;
      r.x = v.states[t].x;
      r.y = v.states[t].y;
      r.psi = v.states[t].psi;
      r.v = v.states[t].v;
      if (t < T) {
        r.a = v.inputs[t].a;
        r.delta = v.inputs[t].delta;
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows)
{
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << "t,vehicle_id,x,y,psi,v,a,delta\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                  r.vehicle_id.c_str(), r.x, r.y, r.psi, r.v, r.a, r.delta);
    out << buf;
  }
}

std::vector<TraceRow> read_trace_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw parse_error("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw parse_error("empty trace file '" + path + "'");
  if (line != "t,vehicle_id,x,y,psi,v,a,delta") {
    throw parse_error("unexpected trace header in '" + path + "'");
  }
  std::vector<TraceRow> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    TraceRow r;
    double* numeric[7] = {&r.t, &r.x, &r.y, &r.psi, &r.v, &r.a, &r.delta};
    int ni = 0;
    for (int col = 0; col < 8; ++col) {
      if (!std::getline(ss, field, ',')) {
        throw parse_error("trace line " + std::to_string(line_no) + ": too few columns");
      }
      if (col == 1) {
        r.vehicle_id = field;
        continue;
      }
      try {
        *numeric[ni++] = std::stod(field);
      } catch (const std::exception&) {
        throw parse_error("trace line " + std::to_string(line_no) + ": bad number '" + field +
                          "'");
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_plot_data(const std::string& dir, const std::string& prefix,
                     const FleetTrajectory& traj)
{
  const int T = traj.horizon();
  const char* names[6] = {"x", "y", "psi", "v", "a", "delta"};
  for (int q = 0; q < 6; ++q) {
    std::ofstream out(dir + "/" + prefix + "_" + names[q] + ".csv");
    if (!out) throw parse_error("cannot write plot data under '" + dir + "'");
    out << "t";
    for (const auto& v : traj.vehicles) out << "," << v.id;
    out << "\n";
    char buf[64];
    const int rows = q < 4 ? T + 1 : T;
    for (int t = 0; t < rows; ++t) {
      std::snprintf(buf, sizeof buf, "%.17g", t * traj.dt);
      out << buf;
      for (const auto& v : traj.vehicles) {
        double val = 0;
        switch (q) {
          case 0: val = v.states[t].x; break;
          case 1: val = v.states[t].y; break;
          case 2: val = v.states[t].psi; break;
          case 3: val = v.states[t].v; break;
          case 4: val = v.inputs[t].a; break;
          case 5: val = v.inputs[t].delta; break;
        }
        std::snprintf(buf, sizeof buf, ",%.17g", val);
        out << buf;
      }
      out << "\n";
    }
  }
}

TraceAuditResult audit_trace(const std::vector<TraceRow>& rows, const TraceAuditOptions& options)
{
  TraceAuditResult res;
  // group rows by time stamp, preserving order
  std::vector<std::pair<double, std::vector<const TraceRow*>>> groups;
  for (const auto& r : rows) {
    if (groups.empty() || std::abs(groups.back().first - r.t) > 1e-9) {
      groups.push_back({r.t, {}});
    }
    groups.back().second.push_back(&r);
  }

  char buf[200];
  for (const auto& [t, group] : groups) {
    std::vector<OrientedPolytope> polys(group.size());
    for (size_t i = 0; i < group.size(); ++i) {
      const auto it = options.dims.find(group[i]->vehicle_id);
      const VehicleParams& p = it != options.dims.end() ? it->second : options.fallback;
      polys[i] = oriented_box(group[i]->x, group[i]->y, group[i]->psi, p.len, p.w);
    }
    for (size_t i = 0; i < group.size(); ++i) {
      for (size_t k = i + 1; k < group.size(); ++k) {
        const double d = polytope_distance(polys[i], polys[k]).dist;
        res.min_pair_distance = std::min(res.min_pair_distance, d);
        if (d < options.d_min) {
          res.passed = false;
          std::snprintf(buf, sizeof buf, "t=%.6g pair (%s, %s) dist %.6f < %.6f", t,
                        group[i]->vehicle_id.c_str(), group[k]->vehicle_id.c_str(), d,
                        options.d_min);
          res.violations.push_back(buf);
        }
      }
      for (const auto& obs : options.obstacles) {
        const double d = polytope_distance(polys[i], obs).dist;
        res.min_obstacle_distance = std::min(res.min_obstacle_distance, d);
        if (d < options.d_min) {
          res.passed = false;
          std::snprintf(buf, sizeof buf, "t=%.6g vehicle %s vs obstacle dist %.6f < %.6f", t,
                        group[i]->vehicle_id.c_str(), d, options.d_min);
          res.violations.push_back(buf);
        }
      }
    }
  }
  return res;
}

}  // namespace platoon
