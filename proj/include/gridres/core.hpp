#pragma once

// Canonical data model for a zonal power system at any spatial/temporal
// resolution. A SystemCase is a plain value: every entity vector is kept in
// lexicographic id order so downstream computations are deterministic.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridres {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed or inconsistent input files. The message carries the
// file and row where the problem was found.
class InputError : public Error {
 public:
  using Error::Error;
};

enum class Tech {
  solar,
  onshore_wind,
  offshore_fixed,
  offshore_floating,
  natural_gas,
  coal,
  nuclear,
};

enum class LineKind { interregional, backbone, spur };

enum class UcMode { none, relaxed };

inline constexpr Tech kAllTechs[] = {
    Tech::solar,       Tech::onshore_wind, Tech::offshore_fixed,
    Tech::offshore_floating, Tech::natural_gas, Tech::coal,
    Tech::nuclear};

inline bool is_vre(Tech t) {
  return t == Tech::solar || t == Tech::onshore_wind ||
         t == Tech::offshore_fixed || t == Tech::offshore_floating;
}
inline bool is_wind(Tech t) { return is_vre(t) && t != Tech::solar; }
inline bool is_offshore(Tech t) {
  return t == Tech::offshore_fixed || t == Tech::offshore_floating;
}
inline bool is_thermal(Tech t) { return !is_vre(t); }

inline std::string_view to_string(Tech t) {
  switch (t) {
    case Tech::solar: return "solar";
    case Tech::onshore_wind: return "onshore_wind";
    case Tech::offshore_fixed: return "offshore_fixed";
    case Tech::offshore_floating: return "offshore_floating";
    case Tech::natural_gas: return "natural_gas";
    case Tech::coal: return "coal";
    case Tech::nuclear: return "nuclear";
  }
  return "?";
}

inline std::optional<Tech> parse_tech(std::string_view s) {
  for (Tech t : kAllTechs)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

inline std::string_view to_string(LineKind k) {
  switch (k) {
    case LineKind::interregional: return "interregional";
    case LineKind::backbone: return "backbone";
    case LineKind::spur: return "spur";
  }
  return "?";
}

inline std::optional<LineKind> parse_line_kind(std::string_view s) {
  if (s == "interregional") return LineKind::interregional;
  if (s == "backbone") return LineKind::backbone;
  if (s == "spur") return LineKind::spur;
  return std::nullopt;
}

inline std::string_view to_string(UcMode m) {
  return m == UcMode::none ? "none" : "relaxed";
}

inline std::optional<UcMode> parse_uc(std::string_view s) {
  if (s == "none") return UcMode::none;
  if (s == "relaxed") return UcMode::relaxed;
  return std::nullopt;
}

struct Region {
  std::string id;
  double urban_population = 0;  // persons in the region's urban area
  double reserve_margin = 0;
  std::vector<double> demand;  // MW, one value per modeled hour

  bool operator==(const Region&) const = default;
};

// Candidate VRE investment site. annual_cf is derived from the profile.
struct Site {
  std::string id;
  std::string fine_region;
  std::string cluster;
  Tech tech = Tech::solar;
  double capacity_limit = 0;  // MW
  double lcoe = 0;            // $/MWh, generation only
  double annual_cf = 0;
  double spur_cost = 0;       // $/MW-yr per hop to an urban sink
  double spur_capacity = 0;   // MW
  std::string spur_sink;      // fine region hosting the urban sink
  std::vector<double> profile;

  bool operator==(const Site&) const = default;
};

struct ThermalUnit {
  std::string id;
  std::string fine_region;
  std::string plant;  // owning cluster id
  double capacity = 0;
  double heat_rate = 0;        // MMBtu/MWh
  double min_output = 0;       // fraction of capacity
  double ramp_rate = 1;        // fraction of capacity per hour
  double start_cost = 0;       // $/MW-start
  double emission_factor = 0;  // tCO2/MMBtu
  double fuel_cost = 0;        // $/MMBtu
  double vom = 0;              // $/MWh

  bool operator==(const ThermalUnit&) const = default;
};

// A modeled resource. Thermal operating parameters live on the cluster and
// apply to all of its capacity, existing or new. For VRE clusters the profile
// is the capacity-weighted mean of member site profiles.
struct ResourceCluster {
  std::string id;
  std::string region;
  Tech tech = Tech::natural_gas;
  double existing_capacity = 0;  // MW
  double max_new_capacity = 0;   // MW
  double inv_cost = 0;           // $/MW-yr on new capacity
  double fom_cost = 0;           // $/MW-yr on all remaining capacity
  double heat_rate = 0;
  double min_output = 0;
  double ramp_rate = 1;
  double start_cost = 0;
  double emission_factor = 0;
  double fuel_cost = 0;
  double vom = 0;
  std::vector<double> profile;  // VRE only

  // $/MWh excluding carbon fees.
  double marginal_cost() const { return fuel_cost * heat_rate + vom; }
  double emission_rate() const { return heat_rate * emission_factor; }

  bool operator==(const ResourceCluster&) const = default;
};

struct StorageCluster {
  std::string id;
  std::string region;
  double power_cost = 0;   // $/MW-yr
  double energy_cost = 0;  // $/MWh-yr
  double efficiency_rt = 1;
  double existing_power = 0;
  double existing_energy = 0;

  bool operator==(const StorageCluster&) const = default;
};

struct TransmissionLine {
  std::string id;
  LineKind kind = LineKind::interregional;
  std::string from, to;            // to == from for backbone/spur
  std::string fine_from, fine_to;  // endpoints at the finest geography
  double capacity = 0;             // MW
  double expansion_cost = 0;       // $/MW-yr
  double max_expansion = 0;        // MW

  bool operator==(const TransmissionLine&) const = default;
};

struct SystemCase {
  std::vector<Region> regions;
  std::vector<ResourceCluster> clusters;
  std::vector<StorageCluster> storage;
  std::vector<TransmissionLine> lines;
  std::vector<Site> sites;
  std::vector<ThermalUnit> units;

  double nse_cost = 2000;  // $/MWh
  double carbon_fee = 0;   // $/tCO2
  int period_length = 24;
  double year_scale = 1;  // hours of the year each modeled hour stands for
  UcMode uc = UcMode::relaxed;
  bool extremes_included = false;

  // One entry per modeled period. A full-resolution year has unit weights
  // and period_source[p] == p.
  std::vector<double> period_weights;
  std::vector<int> period_source;
  std::vector<bool> period_extreme;

  std::size_t hours() const {
    return regions.empty() ? 0 : regions.front().demand.size();
  }
  std::size_t periods() const { return period_weights.size(); }

  bool operator==(const SystemCase&) const = default;
};

// Fills unit period weights for a case whose hours are a full year.
inline void reset_periods(SystemCase& c) {
  std::size_t n = c.period_length > 0 ? c.hours() / c.period_length : 0;
  c.period_weights.assign(n, 1.0);
  c.period_extreme.assign(n, false);
  c.period_source.resize(n);
  for (std::size_t p = 0; p < n; ++p) c.period_source[p] = static_cast<int>(p);
}

template <typename T>
void sort_by_id(std::vector<T>& v) {
  std::sort(v.begin(), v.end(),
            [](const T& a, const T& b) { return a.id < b.id; });
}

inline void canonicalize(SystemCase& c) {
  sort_by_id(c.regions);
  sort_by_id(c.clusters);
  sort_by_id(c.storage);
  sort_by_id(c.lines);
  sort_by_id(c.sites);
  sort_by_id(c.units);
}

// Position lookup by id over an id-sorted vector.
template <typename T>
std::map<std::string, std::size_t> index_by_id(const std::vector<T>& v) {
  std::map<std::string, std::size_t> m;
  for (std::size_t i = 0; i < v.size(); ++i) m.emplace(v[i].id, i);
  return m;
}

template <typename T>
const T* find_by_id(const std::vector<T>& v, std::string_view id) {
  auto it = std::lower_bound(
      v.begin(), v.end(), id,
      [](const T& a, std::string_view key) { return a.id < key; });
  if (it != v.end() && it->id == id) return &*it;
  return nullptr;
}

// Capacity-weighted mean of member profiles; equal weights when every weight
// is zero.
inline std::vector<double> weighted_profile(
    const std::vector<const std::vector<double>*>& profiles,
    const std::vector<double>& weights) {
  std::vector<double> out;
  if (profiles.empty()) return out;
  out.assign(profiles.front()->size(), 0.0);
  double total = 0;
  for (double w : weights) total += w;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    double share = total > 0 ? weights[i] / total
                             : 1.0 / static_cast<double>(profiles.size());
    if (share == 0) continue;
    const auto& p = *profiles[i];
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += share * p[t];
  }
  return out;
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Recomputes every VRE cluster profile from its member sites.
inline void refresh_cluster_profiles(SystemCase& c) {
  auto idx = index_by_id(c.clusters);
  std::vector<std::vector<const std::vector<double>*>> prof(c.clusters.size());
  std::vector<std::vector<double>> w(c.clusters.size());
  for (const auto& s : c.sites) {
    auto it = idx.find(s.cluster);
    if (it == idx.end()) continue;
    prof[it->second].push_back(&s.profile);
    w[it->second].push_back(s.capacity_limit);
  }
  for (std::size_t k = 0; k < c.clusters.size(); ++k) {
    if (!is_vre(c.clusters[k].tech)) {
      c.clusters[k].profile.clear();
      continue;
    }
    c.clusters[k].profile = weighted_profile(prof[k], w[k]);
  }
}

}  // namespace gridres
