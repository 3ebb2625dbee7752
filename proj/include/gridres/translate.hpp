#pragma once

// Disaggregation of a coarse expansion plan onto fine sites, units, regions
// and lines, and assembly of the fine-resolution portfolio.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridres/core.hpp"
#include "gridres/csv.hpp"
#include "gridres/expansion.hpp"
#include "gridres/model.hpp"
#include "gridres/resolution/spatial.hpp"

namespace gridres {

using Allocation = std::vector<std::pair<std::string, double>>;

// Fills sites in ascending LCOE (ties by id); fixed-bottom offshore before
// floating. Only the last site used may be partial.
inline Allocation allocate_vre(double invest, std::vector<Site> sites,
                               const std::map<std::string, double>& room = {}) {
  Allocation out;
  if (invest <= 0) return out;
  auto avail = [&](const Site& s) {
    auto it = room.find(s.id);
    return it == room.end() ? s.capacity_limit : it->second;
  };
  std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
    int fa = a.tech == Tech::offshore_floating, fb = b.tech == Tech::offshore_floating;
    if (fa != fb) return fa < fb;
    if (a.lcoe != b.lcoe) return a.lcoe < b.lcoe;
    return a.id < b.id;
  });
  double total = 0;
  for (const auto& s : sites) total += avail(s);
  if (invest > total * (1 + 1e-12) + 1e-9)
    throw Error("allocate_vre: investment " + csv::fmt(invest) +
                " MW exceeds site capacity " + csv::fmt(total) + " MW");
  double left = invest;
  for (const auto& s : sites) {
    if (left <= 0) break;
    double cap = avail(s);
    if (cap <= 0) continue;
    double mw = std::min(cap, left);
    if (&s == &sites.back() || left - mw <= 1e-12 * invest) mw = left;
    out.push_back({s.id, mw});
    left -= mw;
  }
  return out;
}

// Splits `amount` by weights; the last key in id order takes the remainder
// so the parts sum to the amount.
inline std::map<std::string, double> split_by_weight(
    double amount, const std::map<std::string, double>& weights) {
  std::map<std::string, double> out;
  if (weights.empty()) return out;
  double total = 0;
  for (const auto& [k, w] : weights) total += w;
  double assigned = 0;
  auto last = std::prev(weights.end());
  for (auto it = weights.begin(); it != weights.end(); ++it) {
    double v = it == last ? amount - assigned : amount * it->second / total;
    out[it->first] = v;
    assigned += v;
  }
  return out;
}

inline std::map<std::string, double> allocate_thermal(
    double invest, const std::map<std::string, double>& demand) {
  double total = 0;
  for (const auto& [k, d] : demand) total += d;
  if (demand.empty() || !(total > 0))
    throw Error("allocate_thermal: subregion demand is all zero");
  return split_by_weight(invest, demand);
}

// Shares by VRE capacity; all-zero weights fall back to a uniform split,
// and when no subregion is known at all, to demand.
inline std::map<std::string, std::pair<double, double>> allocate_storage(
    double power, double energy, const std::map<std::string, double>& vre,
    const std::map<std::string, double>& demand = {}) {
  std::map<std::string, double> w = vre;
  double total = 0;
  for (const auto& [k, v] : w) total += v;
  if (!(total > 0)) {
    double dt = 0;
    for (const auto& [k, v] : demand) dt += v;
    if (dt > 0) {
      w = demand;
    } else {
      for (auto& [k, v] : w) v = 1;
    }
  }
  if (w.empty()) throw Error("allocate_storage: no subregions");
  auto p = split_by_weight(power, w);
  auto e = split_by_weight(energy, w);
  std::map<std::string, std::pair<double, double>> out;
  for (const auto& [k, v] : p) out[k] = {v, e[k]};
  return out;
}

// Retires units in descending heat rate (ties by id); the last may be
// partial.
inline Allocation retire_units(double mw, std::vector<ThermalUnit> units) {
  Allocation out;
  if (mw <= 0) return out;
  std::sort(units.begin(), units.end(),
            [](const ThermalUnit& a, const ThermalUnit& b) {
              if (a.heat_rate != b.heat_rate) return a.heat_rate > b.heat_rate;
              return a.id < b.id;
            });
  double total = 0;
  for (const auto& u : units) total += u.capacity;
  if (mw > total * (1 + 1e-12) + 1e-9)
    throw Error("retire_units: retirement " + csv::fmt(mw) +
                " MW exceeds unit capacity " + csv::fmt(total) + " MW");
  double left = mw;
  for (const auto& u : units) {
    if (left <= 0) break;
    double r = std::min(u.capacity, left);
    if (&u == &units.back() || left - r <= 1e-12 * mw) r = left;
    out.push_back({u.id, r});
    left -= r;
  }
  return out;
}

struct SiteAllocation {
  std::map<std::string, double> site_mw;       // new MW per site
  std::map<std::string, double> unit_retired;  // MW per unit
  std::map<std::string, double> thermal_new;   // MW per fine thermal cluster
  std::map<std::string, std::pair<double, double>> storage_new;  // MW, MWh
  std::map<std::string, double> line_mw;       // fine interregional capacity

  struct Entry {
    std::string kind, id;
    double mw;
    std::string provenance;
  };
  std::vector<Entry> entries;
};

struct TranslateOptions {
  double backbone_beta = 1.0;
};

// Fine line capacities from the coarse plan: coarse corridor capacity split
// by endpoint urban population, backbone growth, and spur crossings.
inline std::map<std::string, double> redistrict_transmission(
    const ExpansionSolution& sol, const SystemCase& coarse,
    const SystemCase& fine, const SiteAllocation& alloc,
    const RegionPartition& part, double beta = 1.0) {
  std::map<std::string, double> out;
  std::map<std::string, const Region*> fine_region;
  for (const auto& r : fine.regions) fine_region[r.id] = &r;
  for (const auto& l : fine.lines)
    if (l.kind == LineKind::interregional) out[l.id] = 0;
  auto require = [&](const std::string& id, const std::string& what) {
    if (!out.count(id))
      throw Error("redistricting: " + what + " '" + id +
                  "' has no corresponding fine interregional line");
  };

  // Interregional expansion touching each coarse region.
  std::map<std::string, double> expansion;
  for (const auto& l : coarse.lines) {
    if (l.kind != LineKind::interregional) continue;
    double cap = sol.capacities.line.count(l.id) ? sol.capacities.line.at(l.id)
                                                 : l.capacity;
    double grow = std::max(0.0, cap - l.capacity);
    expansion[l.from] += grow;
    expansion[l.to] += grow;

    std::map<std::string, double> w;
    for (const auto& m : member_line_ids(l.id)) {
      require(m, "corridor member");
      const auto* fl = find_by_id(fine.lines, m);
      w[m] = fine_region.at(fl->fine_from)->urban_population +
             fine_region.at(fl->fine_to)->urban_population;
    }
    for (const auto& [m, v] : split_by_weight(cap, w)) out[m] += v;
  }

  std::map<std::string, double> backbone_total;
  for (const auto& l : coarse.lines)
    if (l.kind == LineKind::backbone) backbone_total[l.from] += l.capacity;
  std::map<std::string, std::vector<const TransmissionLine*>> backbones;
  for (const auto& l : coarse.lines)
    if (l.kind == LineKind::backbone) backbones[l.from].push_back(&l);
  for (const auto& [region, lines] : backbones) {
    std::map<std::string, double> w;
    for (const auto* l : lines) w[l->id] = l->capacity;
    double grow = beta * expansion[region];
    auto share = backbone_total[region] > 0 ? split_by_weight(grow, w)
                                            : std::map<std::string, double>{};
    if (backbone_total[region] <= 0)
      for (const auto* l : lines) share[l->id] = grow / lines.size();
    for (const auto* l : lines) {
      require(l->id, "backbone line");
      out[l->id] += l->capacity + share[l->id];
    }
  }

  // Spurs from invested sites to their sinks.
  FineGraph graph(fine, part);
  std::map<std::pair<std::string, std::string>, std::string> by_ends;
  for (const auto& l : fine.lines)
    if (l.kind == LineKind::interregional) {
      by_ends[{l.fine_from, l.fine_to}] = l.id;
      by_ends[{l.fine_to, l.fine_from}] = l.id;
    }
  for (const auto& [sid, mw] : alloc.site_mw) {
    const Site* s = find_by_id(coarse.sites, sid);
    if (!s || mw <= 0 || s->spur_sink == s->fine_region) continue;
    auto path = graph.path(s->fine_region, s->spur_sink);
    if (path.empty())
      throw Error("redistricting: spur of site '" + sid +
                  "' has no fine path to '" + s->spur_sink + "'");
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      auto it = by_ends.find({path[i], path[i + 1]});
      if (it == by_ends.end())
        throw Error("redistricting: spur crossing " + path[i] + "-" +
                    path[i + 1] + " has no fine line");
      out[it->second] += mw;
    }
  }
  return out;
}

struct Translation {
  SiteAllocation allocation;
  SystemCase hr_case;     // fine case plus any clusters created on the way
  Capacities portfolio;
};

// Fine portfolio from the allocation: existing fine capacity plus invested
// site MW, minus retired unit MW, plus allocated thermal and storage.
inline Capacities build_portfolio(const SystemCase& fine,
                                  const SiteAllocation& alloc) {
  Capacities p = existing_capacities(fine);
  for (const auto& [sid, mw] : alloc.site_mw) {
    const Site* s = find_by_id(fine.sites, sid);
    if (!s) throw Error("build_portfolio: unknown site '" + sid + "'");
    p.cluster[s->cluster] += mw;
  }
  std::map<std::string, double> retired;
  for (const auto& [uid, mw] : alloc.unit_retired) {
    const ThermalUnit* u = find_by_id(fine.units, uid);
    if (!u) throw Error("build_portfolio: unknown unit '" + uid + "'");
    retired[u->plant] += mw;
  }
  for (const auto& [kid, mw] : alloc.thermal_new) {
    if (!p.cluster.count(kid))
      throw Error("build_portfolio: unknown cluster '" + kid + "'");
    p.cluster[kid] += mw;
  }
  for (const auto& [kid, mw] : retired) p.cluster[kid] -= mw;
  for (const auto& [sid, pe] : alloc.storage_new) {
    if (!p.power.count(sid))
      throw Error("build_portfolio: unknown storage '" + sid + "'");
    p.power[sid] += pe.first;
    p.energy[sid] += pe.second;
  }
  for (const auto& [lid, mw] : alloc.line_mw) {
    if (!p.line.count(lid))
      throw Error("build_portfolio: unknown line '" + lid + "'");
    p.line[lid] = mw;
  }
  for (auto* m : {&p.cluster, &p.power, &p.energy, &p.line})
    for (auto& [id, v] : *m) {
      if (v < -1e-6)
        throw Error("build_portfolio: negative capacity for '" + id + "'");
      v = std::max(0.0, v);
    }
  return p;
}

// Full phase bridge for a coarse solution back onto the fine case.
inline Translation translate(const ExpansionSolution& sol,
                             const SystemCase& coarse, const SystemCase& fine,
                             const RegionPartition& part,
                             const TranslateOptions& opt = {}) {
  Translation tr;
  tr.hr_case = fine;
  SiteAllocation& a = tr.allocation;
  auto& hr = tr.hr_case;

  std::map<std::string, double> fine_demand;
  for (const auto& r : fine.regions) {
    double e = 0;
    for (double d : r.demand) e += d;
    fine_demand[r.id] = e;
  }
  auto subregions = [&](const std::string& coarse_id) {
    std::map<std::string, double> out;
    for (const auto& f : part.members(coarse_id)) out[f] = fine_demand.at(f);
    return out;
  };

  // Site room after the existing fleet of each fine VRE cluster.
  std::map<std::string, double> fine_site_cap;
  for (const auto& s : fine.sites) fine_site_cap[s.cluster] += s.capacity_limit;
  std::map<std::string, double> room;
  for (const auto& s : fine.sites) {
    const auto* k = find_by_id(fine.clusters, s.cluster);
    double used = fine_site_cap[s.cluster] > 0
                      ? k->existing_capacity / fine_site_cap[s.cluster]
                      : 0.0;
    room[s.id] = s.capacity_limit * std::max(0.0, 1 - used);
  }

  std::map<std::string, double> vre_by_fine;  // fine region -> VRE MW
  for (const auto& k : fine.clusters)
    if (is_vre(k.tech))
      for (const auto& s : fine.sites)
        if (s.cluster == k.id && fine_site_cap[k.id] > 0)
          vre_by_fine[s.fine_region] +=
              k.existing_capacity * s.capacity_limit / fine_site_cap[k.id];

  for (const auto& k : coarse.clusters) {
    double invest = sol.new_capacity.count(k.id) ? sol.new_capacity.at(k.id) : 0;
    double retire = sol.retirement.count(k.id) ? sol.retirement.at(k.id) : 0;
    if (is_vre(k.tech)) {
      std::vector<Site> members;
      for (const auto& s : coarse.sites)
        if (s.cluster == k.id) members.push_back(s);
      for (const auto& [sid, mw] : allocate_vre(invest, members, room)) {
        a.site_mw[sid] += mw;
        a.entries.push_back({"site", sid, mw, k.id});
        vre_by_fine[find_by_id(fine.sites, sid)->fine_region] += mw;
      }
      continue;
    }
    if (retire > 0) {
      std::vector<ThermalUnit> units;
      for (const auto& u : coarse.units)
        if (u.plant == k.id) units.push_back(u);
      for (const auto& [uid, mw] : retire_units(retire, units)) {
        a.unit_retired[uid] += mw;
        a.entries.push_back({"unit_retired", uid, mw, k.id});
      }
    }
    if (invest > 0) {
      for (const auto& [fr, mw] : allocate_thermal(invest, subregions(k.region))) {
        std::string fid = thermal_cluster_id(fr, k.tech);
        if (!find_by_id(hr.clusters, fid)) {
          // Fine region without this technology: clone the coarse template.
          ResourceCluster t = k;
          t.id = fid;
          t.region = fr;
          t.existing_capacity = 0;
          hr.clusters.push_back(t);
          sort_by_id(hr.clusters);
        }
        a.thermal_new[fid] += mw;
        a.entries.push_back({"thermal_new", fid, mw, k.id});
      }
    }
  }

  for (const auto& s : coarse.storage) {
    double p = sol.new_power.count(s.id) ? sol.new_power.at(s.id) : 0;
    double e = sol.new_energy.count(s.id) ? sol.new_energy.at(s.id) : 0;
    if (p <= 0 && e <= 0) continue;
    std::map<std::string, double> vre;
    for (const auto& f : part.members(s.region))
      vre[f] = vre_by_fine.count(f) ? vre_by_fine.at(f) : 0.0;
    for (const auto& [fr, pe] : allocate_storage(p, e, vre, subregions(s.region))) {
      std::string fid = storage_cluster_id(fr);
      if (!find_by_id(hr.storage, fid)) {
        StorageCluster t = s;
        t.id = fid;
        t.region = fr;
        t.existing_power = t.existing_energy = 0;
        hr.storage.push_back(t);
        sort_by_id(hr.storage);
      }
      auto& slot = a.storage_new[fid];
      slot.first += pe.first;
      slot.second += pe.second;
      a.entries.push_back({"storage_power", fid, pe.first, s.id});
      a.entries.push_back({"storage_energy", fid, pe.second, s.id});
    }
  }

  a.line_mw = redistrict_transmission(sol, coarse, fine, a, part,
                                      opt.backbone_beta);
  for (const auto& [lid, mw] : a.line_mw) a.entries.push_back({"line", lid, mw, ""});
  tr.portfolio = build_portfolio(hr, a);
  return tr;
}

inline void write_allocation(const SiteAllocation& a, const fs::path& path) {
  csv::Writer w(path, {"entity_kind", "entity_id", "mw", "provenance_cluster"});
  for (const auto& e : a.entries) w(e.kind, e.id, e.mw, e.provenance);
  w.close();
}

inline void write_portfolio(const Capacities& p, const fs::path& path) {
  csv::Writer w(path, {"fine_cluster", "mw", "mwh"});
  for (const auto& [id, mw] : p.cluster) w(id, mw, "");
  for (const auto& [id, mw] : p.power) w(id, mw, p.energy.at(id));
  for (const auto& [id, mw] : p.line) w(id, mw, "");
  w.close();
}

}  // namespace gridres
