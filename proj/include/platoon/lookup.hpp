#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "platoon/formation.hpp"
#include "platoon/planner.hpp"

namespace platoon {

/// Content hash of the canonical (n_v, l, p) triple; identical patterns get
/// identical ids across scenarios.
std::string configuration_id(const PlatoonConfiguration& cfg);

struct ManeuverEntry {
  int index = 0;  ///< 1-based position within the family
  double rho = 0;
  FleetTrajectory trajectory;
};

struct TableEntry {
  std::string ci_id;
  std::string cf_id;
  std::vector<ManeuverEntry> family;  ///< ordered by rho ascending, <= max_entries
  std::vector<std::string> warnings;
};

struct RegisteredConfig {
  std::string name;  ///< scenario-local alias, may be empty
  ConfiguredPlatoon platoon;
};

struct ManeuverTable {
  int format_version = 1;
  int max_entries = 9;
  std::map<std::string, RegisteredConfig> configs;  ///< id -> configuration
  std::vector<TableEntry> entries;

  /// Id for a name-or-id key; throws key_not_found_error.
  std::string resolve(const std::string& name_or_id) const;
};

/// Stored family for a configuration pair (read-only). Keys may be config
/// ids or registered names. Throws key_not_found_error for unknown pairs;
/// an empty family is a valid result, distinct from an unknown key.
const std::vector<ManeuverEntry>& query(const ManeuverTable& table, const std::string& ci,
                                        const std::string& cf);

struct BuildTableOptions {
  int max_entries = 9;
  int threads = 1;
};

struct NamedPlatoon {
  std::string name;
  ConfiguredPlatoon platoon;
};

/// Plan the maneuver family for every configuration pair over the rho grid.
/// Infeasible solves are omitted; surviving entries are reindexed 1..M in
/// rho order. A pair with no feasible entry is kept with an empty family
/// and a warning. When ci == cf the grid collapses to a single entry.
ManeuverTable build_table(const std::vector<std::pair<NamedPlatoon, NamedPlatoon>>& pairs,
                          const std::vector<double>& rho_grid, const PlanningScene& scene,
                          const PlannerConfig& cfg, const BuildTableOptions& options = {});

void save_table(const ManeuverTable& table, const std::string& path);
ManeuverTable load_table(const std::string& path);

}  // namespace platoon
