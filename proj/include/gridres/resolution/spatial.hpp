#pragma once

// Spatial aggregation of a fine-geography case onto a coarser partition.

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gridres/core.hpp"
#include "gridres/csv.hpp"
#include "gridres/io.hpp"

namespace gridres {

struct RegionPartition {
  std::map<std::string, std::string> coarse_of;  // fine id -> coarse id
  std::vector<std::string> names;                // sorted coarse ids

  std::vector<std::string> members(const std::string& coarse) const {
    std::vector<std::string> out;
    for (const auto& [f, c] : coarse_of)
      if (c == coarse) out.push_back(f);
    return out;
  }
};

inline RegionPartition identity_partition(const SystemCase& c) {
  RegionPartition p;
  for (const auto& r : c.regions) {
    p.coarse_of[r.id] = r.id;
    p.names.push_back(r.id);
  }
  return p;
}

inline RegionPartition make_partition(
    const std::map<std::string, std::string>& coarse_of) {
  RegionPartition p;
  p.coarse_of = coarse_of;
  std::set<std::string> names;
  for (const auto& [f, c] : coarse_of) names.insert(c);
  p.names.assign(names.begin(), names.end());
  return p;
}

inline RegionPartition load_partition(const fs::path& path) {
  std::map<std::string, std::string> m;
  for (const auto& row : csv::read(path, {"fine_region", "coarse_region"}))
    if (!m.emplace(row.str("fine_region"), row.str("coarse_region")).second)
      row.fail("fine region '" + row.str("fine_region") + "' listed twice");
  return make_partition(m);
}

inline void write_partition(const RegionPartition& p, const fs::path& path) {
  csv::Writer w(path, {"fine_region", "coarse_region"});
  for (const auto& [f, c] : p.coarse_of) w(f, c);
  w.close();
}

// Contiguous blocks of a region list: n fine regions in id order split into
// `parts` groups of near-equal size, named after their first member.
inline RegionPartition block_partition(const SystemCase& c, int parts) {
  const int n = static_cast<int>(c.regions.size());
  if (parts < 1 || parts > n)
    throw Error("block partition: parts must be in [1, " + std::to_string(n) +
                "]");
  std::map<std::string, std::string> m;
  for (int g = 0; g < parts; ++g) {
    int lo = g * n / parts, hi = (g + 1) * n / parts;
    for (int i = lo; i < hi; ++i) m[c.regions[i].id] = c.regions[lo].id;
  }
  return make_partition(m);
}

struct TechBins {
  double lcoe_max = 200;
  int n_lcoe = 5;
  int n_cf = 3;
};

struct BinningConfig {
  std::map<Tech, TechBins> by_tech{
      {Tech::solar, {200, 5, 3}},
      {Tech::onshore_wind, {200, 5, 3}},
      {Tech::offshore_fixed, {300, 3, 2}},
      {Tech::offshore_floating, {300, 3, 2}},
  };

  const TechBins& at(Tech t) const { return by_tech.at(t); }
};

// Weighted mean as sum((w_i / W) * v_i) so a single member reproduces its
// value exactly. Equal weights when all weights are zero.
inline double weighted_mean(const std::vector<double>& v,
                            const std::vector<double>& w) {
  double total = 0;
  for (double x : w) total += x;
  double out = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double share = total > 0 ? w[i] / total : 1.0 / static_cast<double>(v.size());
    out += share * v[i];
  }
  return out;
}

namespace detail {

// Assigns each item of an ordered list to one of n capacity-weighted
// quantile bins by the midpoint of its capacity interval.
inline std::vector<int> quantile_bins(const std::vector<double>& cap, int n) {
  double total = 0;
  for (double c : cap) total += c;
  std::vector<int> bin(cap.size(), 0);
  double cum = 0;
  for (std::size_t i = 0; i < cap.size(); ++i) {
    double mid = total > 0 ? (cum + 0.5 * cap[i]) / total : 0.0;
    bin[i] = std::min(n - 1, static_cast<int>(std::floor(mid * n)));
    cum += cap[i];
  }
  return bin;
}

}  // namespace detail

// Hop distances between fine regions inside each coarse region, over fine
// interregional lines whose endpoints share the coarse region.
struct FineGraph {
  std::map<std::string, std::vector<std::string>> adj;

  FineGraph(const SystemCase& fine, const RegionPartition& part) {
    for (const auto& l : fine.lines) {
      if (l.kind != LineKind::interregional) continue;
      if (part.coarse_of.at(l.fine_from) != part.coarse_of.at(l.fine_to))
        continue;
      adj[l.fine_from].push_back(l.fine_to);
      adj[l.fine_to].push_back(l.fine_from);
    }
    for (auto& [k, v] : adj) std::sort(v.begin(), v.end());
  }

  // Shortest path from a to b (inclusive); empty if unreachable.
  std::vector<std::string> path(const std::string& a,
                                const std::string& b) const {
    std::map<std::string, std::string> parent{{a, a}};
    std::deque<std::string> q{a};
    while (!q.empty()) {
      auto u = q.front();
      q.pop_front();
      if (u == b) break;
      auto it = adj.find(u);
      if (it == adj.end()) continue;
      for (const auto& v : it->second)
        if (parent.emplace(v, u).second) q.push_back(v);
    }
    if (!parent.count(b)) return {};
    std::vector<std::string> p{b};
    while (p.back() != a) p.push_back(parent.at(p.back()));
    std::reverse(p.begin(), p.end());
    return p;
  }
};

// Urban sinks of a coarse region: members with urban population above one
// million plus the most populous member.
inline std::vector<std::string> urban_sinks(
    const std::vector<const Region*>& members) {
  std::vector<std::string> sinks;
  const Region* top = nullptr;
  for (const Region* r : members) {
    if (r->urban_population > 1e6) sinks.push_back(r->id);
    if (!top || r->urban_population > top->urban_population) top = r;
  }
  if (top && std::find(sinks.begin(), sinks.end(), top->id) == sinks.end())
    sinks.push_back(top->id);
  std::sort(sinks.begin(), sinks.end());
  return sinks;
}

inline std::string thermal_cluster_id(const std::string& region, Tech t) {
  return region + "_" + std::string(to_string(t));
}

inline std::string storage_cluster_id(const std::string& region) {
  return region + "_battery";
}

inline SystemCase aggregate_spatial(const SystemCase& fine,
                                    const RegionPartition& part,
                                    const BinningConfig& binning = {}) {
  for (const auto& r : fine.regions)
    if (!part.coarse_of.count(r.id))
      throw Error("partition not total: fine region '" + r.id +
                  "' is unmapped");
  for (const auto& [f, c] : part.coarse_of)
    if (!find_by_id(fine.regions, f))
      throw Error("partition references unknown fine region '" + f + "'");
  for (const auto& name : part.names)
    if (part.members(name).empty())
      throw Error("empty coarse region '" + name + "'");

  SystemCase out;
  out.nse_cost = fine.nse_cost;
  out.carbon_fee = fine.carbon_fee;
  out.period_length = fine.period_length;
  out.year_scale = fine.year_scale;
  out.uc = fine.uc;
  out.extremes_included = fine.extremes_included;
  out.period_weights = fine.period_weights;
  out.period_source = fine.period_source;
  out.period_extreme = fine.period_extreme;

  const std::size_t H = fine.hours();
  std::map<std::string, std::vector<const Region*>> members;
  for (const auto& r : fine.regions)
    members[part.coarse_of.at(r.id)].push_back(&r);

  for (const auto& [cid, mem] : members) {
    Region r;
    r.id = cid;
    r.demand.assign(H, 0.0);
    std::vector<double> margins, energy;
    for (const Region* m : mem) {
      r.urban_population += m->urban_population;
      for (std::size_t t = 0; t < H; ++t) r.demand[t] += m->demand[t];
      margins.push_back(m->reserve_margin);
      double e = 0;
      for (double d : m->demand) e += d;
      energy.push_back(e);
    }
    r.reserve_margin = weighted_mean(margins, energy);
    out.regions.push_back(std::move(r));
  }

  // Thermal clusters: one per (coarse region, tech).
  auto fine_cluster = index_by_id(fine.clusters);
  std::map<std::pair<std::string, Tech>, std::vector<const ResourceCluster*>>
      thermal;
  for (const auto& k : fine.clusters)
    if (is_thermal(k.tech))
      thermal[{part.coarse_of.at(k.region), k.tech}].push_back(&k);
  for (const auto& [key, mem] : thermal) {
    ResourceCluster k;
    k.id = thermal_cluster_id(key.first, key.second);
    k.region = key.first;
    k.tech = key.second;
    std::vector<double> w;
    for (const auto* m : mem) {
      k.existing_capacity += m->existing_capacity;
      k.max_new_capacity += m->max_new_capacity;
      w.push_back(m->existing_capacity + m->max_new_capacity);
    }
    auto avg = [&](double ResourceCluster::*field) {
      std::vector<double> v;
      for (const auto* m : mem) v.push_back(m->*field);
      return weighted_mean(v, w);
    };
    k.inv_cost = avg(&ResourceCluster::inv_cost);
    k.fom_cost = avg(&ResourceCluster::fom_cost);
    k.heat_rate = avg(&ResourceCluster::heat_rate);
    k.min_output = avg(&ResourceCluster::min_output);
    k.ramp_rate = avg(&ResourceCluster::ramp_rate);
    k.start_cost = avg(&ResourceCluster::start_cost);
    k.emission_factor = avg(&ResourceCluster::emission_factor);
    k.fuel_cost = avg(&ResourceCluster::fuel_cost);
    k.vom = avg(&ResourceCluster::vom);
    out.clusters.push_back(std::move(k));
  }
  for (const auto& u : fine.units) {
    ThermalUnit v = u;
    const auto& fk = fine.clusters[fine_cluster.at(u.plant)];
    v.plant = thermal_cluster_id(part.coarse_of.at(fk.region), fk.tech);
    out.units.push_back(std::move(v));
  }

  // VRE sites: filter, recompute spur targets, re-bin.
  FineGraph graph(fine, part);
  std::map<std::string, std::vector<std::string>> sinks;
  for (const auto& [cid, mem] : members) sinks[cid] = urban_sinks(mem);

  std::map<std::string, double> fine_vre_cap;  // fine cluster -> site MW
  for (const auto& s : fine.sites) fine_vre_cap[s.cluster] += s.capacity_limit;

  std::map<std::pair<std::string, Tech>, std::vector<Site>> pool;
  std::map<std::string, int> hops;
  for (const auto& s : fine.sites) {
    if (s.lcoe > binning.at(s.tech).lcoe_max) continue;
    Site v = s;
    const auto& cid = part.coarse_of.at(s.fine_region);
    int best = -1;
    for (const auto& sink : sinks[cid]) {
      auto p = graph.path(s.fine_region, sink);
      if (p.empty()) continue;
      int d = static_cast<int>(p.size()) - 1;
      if (best < 0 || d < best) {
        best = d;
        v.spur_sink = sink;
      }
    }
    if (best < 0) {
      best = 0;
      v.spur_sink = s.fine_region;
    }
    hops[v.id] = best;
    pool[{cid, s.tech}].push_back(std::move(v));
  }

  for (auto& [key, sites] : pool) {
    const TechBins& cfg = binning.at(key.second);
    std::sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) {
      return a.lcoe != b.lcoe ? a.lcoe < b.lcoe : a.id < b.id;
    });
    std::vector<double> cap;
    for (const auto& s : sites) cap.push_back(s.capacity_limit);
    auto lbin = detail::quantile_bins(cap, cfg.n_lcoe);

    for (int i = 0; i < cfg.n_lcoe; ++i) {
      std::vector<Site*> group;
      for (std::size_t j = 0; j < sites.size(); ++j)
        if (lbin[j] == i) group.push_back(&sites[j]);
      if (group.empty()) continue;
      std::sort(group.begin(), group.end(), [](const Site* a, const Site* b) {
        return a->annual_cf != b->annual_cf ? a->annual_cf < b->annual_cf
                                            : a->id < b->id;
      });
      std::vector<double> gcap;
      for (const Site* s : group) gcap.push_back(s->capacity_limit);
      auto cbin = detail::quantile_bins(gcap, cfg.n_cf);

      for (int j = 0; j < cfg.n_cf; ++j) {
        std::vector<Site*> mem;
        for (std::size_t q = 0; q < group.size(); ++q)
          if (cbin[q] == j) mem.push_back(group[q]);
        if (mem.empty()) continue;
        ResourceCluster k;
        k.id = key.first + "_" + std::string(to_string(key.second)) + "_l" +
               std::to_string(i + 1) + "c" + std::to_string(j + 1);
        k.region = key.first;
        k.tech = key.second;
        k.ramp_rate = 1;
        std::vector<double> w, annual;
        std::map<std::string, double> shared;  // fine cluster -> MW shared
        double total = 0;
        for (Site* s : mem) {
          w.push_back(s->capacity_limit);
          annual.push_back(s->lcoe * s->annual_cf * 8760.0 +
                           s->spur_cost * (1 + hops.at(s->id)));
          shared[s->cluster] += s->capacity_limit;
          total += s->capacity_limit;
        }
        k.inv_cost = weighted_mean(annual, w);
        for (const auto& [fid, mw] : shared) {
          const auto& fk = fine.clusters[fine_cluster.at(fid)];
          double frac = mw == fine_vre_cap.at(fid) ? 1.0
                                                    : mw / fine_vre_cap.at(fid);
          k.existing_capacity += frac * fk.existing_capacity;
        }
        k.max_new_capacity = std::max(0.0, total - k.existing_capacity);
        for (Site* s : mem) s->cluster = k.id;
        out.clusters.push_back(std::move(k));
      }
    }
    for (auto& s : sites) out.sites.push_back(std::move(s));
  }

  // Storage: one battery cluster per coarse region.
  std::map<std::string, std::vector<const StorageCluster*>> batt;
  for (const auto& s : fine.storage)
    batt[part.coarse_of.at(s.region)].push_back(&s);
  for (const auto& [cid, mem] : batt) {
    StorageCluster s;
    s.id = storage_cluster_id(cid);
    s.region = cid;
    std::vector<double> w, pc, ec, eff;
    for (const auto* m : mem) {
      s.existing_power += m->existing_power;
      s.existing_energy += m->existing_energy;
      w.push_back(m->existing_power);
      pc.push_back(m->power_cost);
      ec.push_back(m->energy_cost);
      eff.push_back(m->efficiency_rt);
    }
    s.power_cost = weighted_mean(pc, w);
    s.energy_cost = weighted_mean(ec, w);
    s.efficiency_rt = weighted_mean(eff, w);
    out.storage.push_back(std::move(s));
  }

  // Lines: internal interregional lines become backbone; parallel coarse
  // corridors merge into one line whose id joins the member ids with '+'.
  std::map<std::pair<std::string, std::string>,
           std::vector<TransmissionLine>> corridors;
  for (const auto& l : fine.lines) {
    TransmissionLine v = l;
    const auto& a = part.coarse_of.at(l.fine_from);
    const auto& b = part.coarse_of.at(l.fine_to);
    if (l.kind != LineKind::interregional || a == b) {
      if (l.kind == LineKind::interregional) v.kind = LineKind::backbone;
      v.from = v.to = a;
      out.lines.push_back(std::move(v));
      continue;
    }
    v.from = a;
    v.to = b;
    if (b < a) {
      std::swap(v.from, v.to);
      std::swap(v.fine_from, v.fine_to);
    }
    corridors[{v.from, v.to}].push_back(std::move(v));
  }
  for (auto& [ends, mem] : corridors) {
    if (mem.size() == 1) {
      out.lines.push_back(std::move(mem.front()));
      continue;
    }
    sort_by_id(mem);
    TransmissionLine l = mem.front();
    std::vector<double> w, cost;
    l.capacity = l.max_expansion = 0;
    for (std::size_t i = 0; i < mem.size(); ++i) {
      if (i) l.id += "+" + mem[i].id;
      l.capacity += mem[i].capacity;
      l.max_expansion += mem[i].max_expansion;
      w.push_back(mem[i].capacity);
      cost.push_back(mem[i].expansion_cost);
    }
    l.expansion_cost = weighted_mean(cost, w);
    out.lines.push_back(std::move(l));
  }

  canonicalize(out);
  refresh_derived(out);
  return out;
}

// Fine lines underlying a coarse interregional line.
inline std::vector<std::string> member_line_ids(const std::string& id) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = id.find('+', start);
    out.push_back(id.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace gridres
