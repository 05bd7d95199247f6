#include "platoon/formation.hpp"

#include <algorithm>
#include <cmath>

#include "platoon/errors.hpp"

namespace platoon {

int RoadGeometry::nearest_lane(double y) const
{
  const int j = static_cast<int>(std::lround(y / lane_width + 0.5));
  return std::clamp(j, 1, n_lanes);
}

int PlatoonConfiguration::lane_count(int j) const
{
  if (!lane_occupied(j)) return 0;
  int count = 1;
  for (int k = 1; k < n_v; ++k) {
    if (p(j - 1, k) != 0.0) count = k + 1;
  }
  return count;
}

int PlatoonConfiguration::reference_lane() const
{
  for (int j = 1; j <= n_lanes(); ++j) {
    if (lane_occupied(j)) return j;
  }
  throw parse_error("configuration occupies no lane");
}

int PlatoonConfiguration::total_vehicles() const
{
  int total = 0;
  for (int j = 1; j <= n_lanes(); ++j) total += lane_count(j);
  return total;
}

void PlatoonConfiguration::validate() const
{
  if (n_v < 1) throw parse_error("configuration: n_v must be >= 1");
  if (l.empty()) throw parse_error("configuration: empty lane indicator");
  if (p.rows() != n_lanes() || p.cols() != n_v) {
    throw parse_error("configuration: p must be n_lanes x n_v");
  }
  reference_lane();
  if (p(reference_lane() - 1, 0) != 0.0) {
    throw parse_error("configuration: reference-lane shift must be zero");
  }
}

std::vector<Eigen::Vector2d> expand(const PlatoonConfiguration& cfg, const RoadGeometry& road,
                                    const VehicleParams& params)
{
  cfg.validate();
  if (cfg.n_lanes() > road.n_lanes) {
    throw parse_error("configuration spans more lanes than the road has");
  }
  const int ref = cfg.reference_lane();

  const auto lane_positions = [&](int j) {
    std::vector<double> xs;
    const int count = cfg.lane_count(j);
    double x = -cfg.p(j - 1, 0);  // front-most, relative to the reference front
    xs.push_back(x);
    for (int k = 1; k < count; ++k) {
      const double gap = cfg.p(j - 1, k);
      if (gap < 0) {
        throw parse_error("configuration: negative gap implies overlapping footprints");
      }
      x -= gap + params.len;
      xs.push_back(x);
    }
    return xs;
  };

  const std::vector<double> ref_xs = lane_positions(ref);
  const double origin = ref_xs.back();

  std::vector<Eigen::Vector2d> out;
  const auto append_lane = [&](int j) {
    const double y = road.lane_center(j);
    for (double x : lane_positions(j)) out.emplace_back(x - origin, y);
  };
  append_lane(ref);
  for (int j = 1; j <= cfg.n_lanes(); ++j) {
    if (j != ref && cfg.lane_occupied(j)) append_lane(j);
  }
  return out;
}

std::vector<double> integrate_ref(double x0, double v_max, int T, double dt)
{
  if (T < 0 || dt <= 0) throw parse_error("integrate_ref: need T >= 0 and dt > 0");
  std::vector<double> xs(static_cast<size_t>(T) + 1);
  xs[0] = x0;
  for (int t = 0; t < T; ++t) xs[t + 1] = xs[t] + v_max * dt;
  return xs;
}

const ReferenceTrajectory& ReferenceSet::for_vehicle(const std::string& id) const
{
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return trajectories[i];
  }
  throw key_not_found_error("no reference trajectory for vehicle '" + id + "'");
}

ReferenceSet build_reference(const ConfiguredPlatoon& ci, const ConfiguredPlatoon& cf,
                             const std::vector<double>& rho, double v_max, int T, double dt,
                             const RoadGeometry& road, const VehicleParams& params,
                             double x_offset)
{
  const std::vector<Eigen::Vector2d> slots_i = expand(ci.cfg, road, params);
  const std::vector<Eigen::Vector2d> slots_f = expand(cf.cfg, road, params);
  const size_t n = slots_i.size();
  if (ci.vehicle_ids.size() != n || cf.vehicle_ids.size() != slots_f.size() ||
      n != slots_f.size()) {
    throw error("build_reference: vehicle counts of the two configurations differ");
  }
  if (rho.size() != n) {
    throw error("build_reference: need one switch fraction per vehicle");
  }
  for (double r : rho) {
    if (!(r > 0 && r < 1)) throw error("build_reference: rho must lie in (0, 1)");
  }

  double mean_i = 0, mean_f = 0;
  for (const auto& s : slots_i) mean_i += s.x();
  for (const auto& s : slots_f) mean_f += s.x();
  mean_i /= static_cast<double>(n);
  mean_f /= static_cast<double>(n);

  ReferenceSet set;
  set.ids = ci.vehicle_ids;
  set.trajectories.resize(n);
  set.switch_step = static_cast<int>(std::floor(rho[0] * T));

  for (size_t vi = 0; vi < n; ++vi) {
    const std::string& id = ci.vehicle_ids[vi];
    const auto it = std::find(cf.vehicle_ids.begin(), cf.vehicle_ids.end(), id);
    if (it == cf.vehicle_ids.end()) {
      throw error("build_reference: vehicle '" + id + "' missing from the final configuration");
    }
    const size_t vf = static_cast<size_t>(it - cf.vehicle_ids.begin());

    const int ks = static_cast<int>(std::floor(rho[vi] * T));
    const std::vector<double> x_init =
        integrate_ref(slots_i[vi].x() + x_offset, v_max, T, dt);
    const std::vector<double> x_final =
        integrate_ref(slots_f[vf].x() - mean_f + mean_i + x_offset, v_max, T, dt);

    auto& traj = set.trajectories[vi].states;
    traj.resize(static_cast<size_t>(T) + 1);
    for (int t = 0; t <= T; ++t) {
      VehicleState z;
      z.x = t <= ks ? x_init[t] : x_final[t];
      z.y = t <= ks ? slots_i[vi].y() : slots_f[vf].y();
      z.psi = 0.0;
      z.v = v_max;
      traj[t] = z;
    }
  }
  return set;
}

ReferenceSet build_reference(const ConfiguredPlatoon& ci, const ConfiguredPlatoon& cf, double rho,
                             double v_max, int T, double dt, const RoadGeometry& road,
                             const VehicleParams& params, double x_offset)
{
  const std::vector<double> per_vehicle(ci.vehicle_ids.size(), rho);
  return build_reference(ci, cf, per_vehicle, v_max, T, dt, road, params, x_offset);
}

}  // namespace platoon
