#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gridres/core.hpp"

namespace gridres {

struct Violation {
  std::string entity;  // "region", "site", ...
  std::string id;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

inline std::string describe(const Violation& v) {
  return v.entity + " '" + v.id + "': " + v.rule;
}

namespace detail {

template <typename T>
void check_unique(const std::vector<T>& v, const char* entity,
                  std::vector<Violation>& out) {
  std::set<std::string> seen;
  for (const auto& e : v)
    if (!seen.insert(e.id).second) out.push_back({entity, e.id, "duplicate id"});
}

inline bool in_unit_interval(const std::vector<double>& p) {
  for (double x : p)
    if (!(x >= 0.0 && x <= 1.0)) return false;
  return true;
}

}  // namespace detail

// Checks every type invariant of the data model. Violations are data: the
// result is empty iff the case is valid.
inline std::vector<Violation> validate(const SystemCase& c) {
  std::vector<Violation> out;
  detail::check_unique(c.regions, "region", out);
  detail::check_unique(c.clusters, "cluster", out);
  detail::check_unique(c.storage, "storage", out);
  detail::check_unique(c.lines, "line", out);
  detail::check_unique(c.sites, "site", out);
  detail::check_unique(c.units, "unit", out);

  std::set<std::string> region_ids;
  for (const auto& r : c.regions) region_ids.insert(r.id);
  const std::size_t hours = c.hours();

  for (const auto& r : c.regions) {
    if (!(r.urban_population >= 0))
      out.push_back({"region", r.id, "urban_population >= 0"});
    if (!(r.reserve_margin >= 0))
      out.push_back({"region", r.id, "reserve_margin >= 0"});
    if (r.demand.size() != hours)
      out.push_back({"region", r.id, "demand hours equal across regions"});
    for (double d : r.demand)
      if (!(d >= 0) || !std::isfinite(d)) {
        out.push_back({"region", r.id, "demand >= 0"});
        break;
      }
  }

  if (c.period_length <= 0 || hours % c.period_length != 0) {
    out.push_back({"case", "scalars", "hours divisible by period_length"});
  } else if (c.periods() != hours / c.period_length ||
             c.period_source.size() != c.periods() ||
             c.period_extreme.size() != c.periods()) {
    out.push_back({"case", "periods", "one weight per period"});
  }
  for (double w : c.period_weights)
    if (!(w > 0)) {
      out.push_back({"case", "periods", "weight > 0"});
      break;
    }
  if (!(c.nse_cost > 0)) out.push_back({"case", "scalars", "nse_cost > 0"});
  if (!(c.year_scale > 0))
    out.push_back({"case", "scalars", "year_scale > 0"});
  if (!(c.carbon_fee >= 0))
    out.push_back({"case", "scalars", "carbon_fee >= 0"});

  auto cluster_idx = index_by_id(c.clusters);
  std::vector<double> unit_capacity(c.clusters.size(), 0.0);
  std::vector<int> site_count(c.clusters.size(), 0);

  for (const auto& s : c.sites) {
    if (!(s.capacity_limit > 0))
      out.push_back({"site", s.id, "capacity_limit > 0"});
    if (!(s.lcoe > 0)) out.push_back({"site", s.id, "lcoe > 0"});
    if (!(s.annual_cf >= 0 && s.annual_cf <= 1))
      out.push_back({"site", s.id, "0 <= annual_cf <= 1"});
    if (s.profile.size() != hours)
      out.push_back({"site", s.id, "profile hours match demand"});
    if (!detail::in_unit_interval(s.profile))
      out.push_back({"site", s.id, "profile out of [0,1]"});
    if (s.spur_capacity != s.capacity_limit)
      out.push_back({"site", s.id, "spur_capacity equals capacity_limit"});
    if (!(s.spur_cost >= 0)) out.push_back({"site", s.id, "spur_cost >= 0"});
    auto it = cluster_idx.find(s.cluster);
    if (it == cluster_idx.end()) {
      out.push_back({"site", s.id, "cluster reference resolves"});
      continue;
    }
    const auto& k = c.clusters[it->second];
    if (!is_vre(k.tech) || k.tech != s.tech)
      out.push_back({"site", s.id, "site tech matches cluster tech"});
    ++site_count[it->second];
  }

  for (const auto& u : c.units) {
    if (!(u.heat_rate > 0)) out.push_back({"unit", u.id, "heat_rate > 0"});
    if (!(u.min_output >= 0)) out.push_back({"unit", u.id, "min_output >= 0"});
    if (!(u.min_output <= 1)) out.push_back({"unit", u.id, "min_output <= 1"});
    if (!(u.ramp_rate > 0 && u.ramp_rate <= 1))
      out.push_back({"unit", u.id, "0 < ramp_rate <= 1"});
    if (!(u.capacity >= 0)) out.push_back({"unit", u.id, "capacity >= 0"});
    auto it = cluster_idx.find(u.plant);
    if (it == cluster_idx.end()) {
      out.push_back({"unit", u.id, "plant reference resolves"});
      continue;
    }
    if (!is_thermal(c.clusters[it->second].tech))
      out.push_back({"unit", u.id, "plant is a thermal cluster"});
    unit_capacity[it->second] += u.capacity;
  }

  for (std::size_t i = 0; i < c.clusters.size(); ++i) {
    const auto& k = c.clusters[i];
    if (!region_ids.count(k.region))
      out.push_back({"cluster", k.id, "region reference resolves"});
    if (!(k.existing_capacity >= 0))
      out.push_back({"cluster", k.id, "existing_capacity >= 0"});
    if (!(k.max_new_capacity >= 0))
      out.push_back({"cluster", k.id, "max_new_capacity >= 0"});
    if (!(k.inv_cost >= 0 && k.fom_cost >= 0))
      out.push_back({"cluster", k.id, "costs >= 0"});
    if (is_vre(k.tech)) {
      if (site_count[i] == 0)
        out.push_back({"cluster", k.id, "VRE cluster has member sites"});
      if (!detail::in_unit_interval(k.profile))
        out.push_back({"cluster", k.id, "profile out of [0,1]"});
    } else {
      if (!(k.heat_rate > 0))
        out.push_back({"cluster", k.id, "heat_rate > 0"});
      if (!(k.min_output >= 0 && k.min_output <= 1))
        out.push_back({"cluster", k.id, "min_output <= 1"});
      if (!(k.ramp_rate > 0 && k.ramp_rate <= 1))
        out.push_back({"cluster", k.id, "0 < ramp_rate <= 1"});
      double tol = 1e-6 * std::max(1.0, k.existing_capacity);
      if (std::abs(unit_capacity[i] - k.existing_capacity) > tol)
        out.push_back(
            {"cluster", k.id, "existing_capacity equals member unit capacity"});
    }
  }

  for (const auto& s : c.storage) {
    if (!region_ids.count(s.region))
      out.push_back({"storage", s.id, "region reference resolves"});
    if (!(s.efficiency_rt > 0 && s.efficiency_rt <= 1))
      out.push_back({"storage", s.id, "efficiency_rt in (0,1]"});
    if (!(s.existing_power >= 0 && s.existing_energy >= 0))
      out.push_back({"storage", s.id, "existing capacity >= 0"});
  }

  for (const auto& l : c.lines) {
    if (!region_ids.count(l.from) || !region_ids.count(l.to))
      out.push_back({"line", l.id, "endpoint references resolve"});
    if (l.kind == LineKind::interregional && l.from == l.to)
      out.push_back({"line", l.id, "interregional endpoints distinct"});
    if (l.kind != LineKind::interregional && l.from != l.to)
      out.push_back({"line", l.id, "intraregional line has one region"});
    if (!(l.capacity >= 0)) out.push_back({"line", l.id, "capacity >= 0"});
    if (!(l.max_expansion >= 0 && l.expansion_cost >= 0))
      out.push_back({"line", l.id, "expansion terms >= 0"});
  }
  return out;
}

}  // namespace gridres
