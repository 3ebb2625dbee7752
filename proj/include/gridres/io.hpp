#pragma once

// Case directory ingestion and emission.
//
//   regions.csv        id,urban_population,reserve_margin
//   demand.csv         region,hour,mw
//   sites.csv          id,fine_region,cluster,tech,capacity_limit_mw,lcoe,
//                      spur_cost,spur_capacity_mw[,spur_sink]
//   site_profiles.csv  site,hour,cf
//   units.csv          id,fine_region,plant,capacity_mw,heat_rate,min_output,
//                      ramp,start_cost,emission_factor,fuel_cost,vom
//   clusters.csv       id,region,tech,existing_mw,max_new_mw,inv_cost,
//                      fom_cost,heat_rate,min_output,ramp,start_cost,
//                      emission_factor,fuel_cost,vom
//   storage.csv        id,region,power_cost,energy_cost,efficiency_rt,
//                      existing_power_mw,existing_energy_mwh
//   lines.csv          id,kind,from,to,fine_from,fine_to,capacity_mw,
//                      expansion_cost,max_expansion_mw
//   scalars.csv        nse_cost,carbon_fee,period_length[,uc,
//                      extremes_included,year_scale]
//   periods.csv        period,weight,is_extreme,source   (optional)

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gridres/core.hpp"
#include "gridres/csv.hpp"
#include "gridres/validate.hpp"

namespace gridres {

namespace fs = std::filesystem;

// Weighted mean of a site profile over the modeled periods.
inline double annual_cf(const std::vector<double>& profile,
                        const SystemCase& c) {
  if (profile.empty()) return 0;
  if (c.period_length <= 0 || c.periods() * c.period_length != profile.size())
    return mean(profile);
  double num = 0, den = 0;
  for (std::size_t p = 0; p < c.periods(); ++p) {
    double w = c.period_weights[p];
    for (int h = 0; h < c.period_length; ++h)
      num += w * profile[p * c.period_length + h];
    den += w * c.period_length;
  }
  return den > 0 ? num / den : 0;
}

inline void refresh_derived(SystemCase& c) {
  for (auto& s : c.sites) s.annual_cf = annual_cf(s.profile, c);
  refresh_cluster_profiles(c);
}

namespace detail {

// Reads a (key, hour, value) series file into per-key vectors.
inline std::map<std::string, std::vector<double>> read_series(
    const fs::path& path, const char* key_col, const char* value_col,
    bool unit_interval, const char* what) {
  std::map<std::string, std::map<long, double>> raw;
  for (const auto& row : csv::read(path, {key_col, "hour", value_col})) {
    long h = row.integer("hour");
    double v = row.num(value_col);
    if (h < 0) row.fail("hour must be >= 0");
    if (unit_interval && !(v >= 0 && v <= 1)) row.fail("profile out of [0,1]");
    if (!unit_interval && !(v >= 0)) row.fail(std::string(what) + " must be >= 0");
    if (!raw[row.str(key_col)].emplace(h, v).second)
      row.fail("duplicate hour " + std::to_string(h));
  }
  std::map<std::string, std::vector<double>> out;
  for (auto& [key, series] : raw) {
    std::vector<double> v;
    v.reserve(series.size());
    long expect = 0;
    for (auto& [h, x] : series) {
      if (h != expect)
        throw InputError(path.filename().string() + ": " + key +
                         " is missing hour " + std::to_string(expect));
      v.push_back(x);
      ++expect;
    }
    out.emplace(key, std::move(v));
  }
  return out;
}

}  // namespace detail

inline SystemCase load_system(const fs::path& dir) {
  SystemCase c;

  {
    auto rows = csv::read(dir / "scalars.csv",
                          {"nse_cost", "carbon_fee", "period_length"});
    if (rows.size() != 1)
      throw InputError("scalars.csv: expected exactly one data row");
    const auto& r = rows.front();
    c.nse_cost = r.num("nse_cost");
    c.carbon_fee = r.num("carbon_fee");
    c.period_length = static_cast<int>(r.integer("period_length"));
    if (r.has("uc")) {
      auto uc = parse_uc(r.str("uc"));
      if (!uc) r.fail("unknown uc mode '" + r.str("uc") + "'");
      c.uc = *uc;
    }
    if (r.has("year_scale")) c.year_scale = r.num("year_scale");
    if (r.has("extremes_included"))
      c.extremes_included = r.integer("extremes_included") != 0;
  }

  auto demand = detail::read_series(dir / "demand.csv", "region", "mw", false,
                                    "demand");
  for (const auto& row :
       csv::read(dir / "regions.csv",
                 {"id", "urban_population", "reserve_margin"})) {
    Region r;
    r.id = row.str("id");
    r.urban_population = row.num("urban_population");
    r.reserve_margin = row.num("reserve_margin");
    auto it = demand.find(r.id);
    if (it == demand.end()) row.fail("region '" + r.id + "' has no demand");
    r.demand = std::move(it->second);
    demand.erase(it);
    c.regions.push_back(std::move(r));
  }
  if (!demand.empty())
    throw InputError("demand.csv: dangling reference to region '" +
                     demand.begin()->first + "'");

  std::map<std::string, bool> region_known;
  for (const auto& r : c.regions) region_known[r.id] = true;

  for (const auto& row : csv::read(
           dir / "clusters.csv",
           {"id", "region", "tech", "existing_mw", "max_new_mw", "inv_cost",
            "fom_cost", "heat_rate", "min_output", "ramp", "start_cost",
            "emission_factor", "fuel_cost", "vom"})) {
    ResourceCluster k;
    k.id = row.str("id");
    k.region = row.str("region");
    if (!region_known.count(k.region))
      row.fail("dangling reference to region '" + k.region + "'");
    auto tech = parse_tech(row.str("tech"));
    if (!tech) row.fail("unknown tech '" + row.str("tech") + "'");
    k.tech = *tech;
    k.existing_capacity = row.num("existing_mw");
    k.max_new_capacity = row.num("max_new_mw");
    k.inv_cost = row.num("inv_cost");
    k.fom_cost = row.num("fom_cost");
    k.heat_rate = row.num("heat_rate");
    k.min_output = row.num("min_output");
    k.ramp_rate = row.num("ramp");
    k.start_cost = row.num("start_cost");
    k.emission_factor = row.num("emission_factor");
    k.fuel_cost = row.num("fuel_cost");
    k.vom = row.num("vom");
    c.clusters.push_back(std::move(k));
  }
  std::map<std::string, Tech> cluster_tech;
  for (const auto& k : c.clusters) cluster_tech.emplace(k.id, k.tech);

  auto profiles = detail::read_series(dir / "site_profiles.csv", "site", "cf",
                                      true, "cf");
  for (const auto& row : csv::read(
           dir / "sites.csv",
           {"id", "fine_region", "cluster", "tech", "capacity_limit_mw",
            "lcoe", "spur_cost", "spur_capacity_mw"})) {
    Site s;
    s.id = row.str("id");
    s.fine_region = row.str("fine_region");
    s.cluster = row.str("cluster");
    auto tech = parse_tech(row.str("tech"));
    if (!tech || !is_vre(*tech))
      row.fail("unknown VRE tech '" + row.str("tech") + "'");
    s.tech = *tech;
    if (!cluster_tech.count(s.cluster))
      row.fail("dangling reference to cluster '" + s.cluster + "'");
    s.capacity_limit = row.num("capacity_limit_mw");
    s.lcoe = row.num("lcoe");
    s.spur_cost = row.num("spur_cost");
    s.spur_capacity = row.num("spur_capacity_mw");
    s.spur_sink = row.has("spur_sink") ? row.str("spur_sink") : s.fine_region;
    auto it = profiles.find(s.id);
    if (it == profiles.end()) row.fail("site '" + s.id + "' has no profile");
    s.profile = std::move(it->second);
    profiles.erase(it);
    c.sites.push_back(std::move(s));
  }
  if (!profiles.empty())
    throw InputError("site_profiles.csv: dangling reference to site '" +
                     profiles.begin()->first + "'");

  for (const auto& row : csv::read(
           dir / "units.csv",
           {"id", "fine_region", "plant", "capacity_mw", "heat_rate",
            "min_output", "ramp", "start_cost", "emission_factor",
            "fuel_cost", "vom"})) {
    ThermalUnit u;
    u.id = row.str("id");
    u.fine_region = row.str("fine_region");
    u.plant = row.str("plant");
    if (!cluster_tech.count(u.plant))
      row.fail("dangling reference to cluster '" + u.plant + "'");
    u.capacity = row.num("capacity_mw");
    u.heat_rate = row.num("heat_rate");
    u.min_output = row.num("min_output");
    u.ramp_rate = row.num("ramp");
    u.start_cost = row.num("start_cost");
    u.emission_factor = row.num("emission_factor");
    u.fuel_cost = row.num("fuel_cost");
    u.vom = row.num("vom");
    c.units.push_back(std::move(u));
  }

  for (const auto& row : csv::read(
           dir / "storage.csv",
           {"id", "region", "power_cost", "energy_cost", "efficiency_rt",
            "existing_power_mw", "existing_energy_mwh"})) {
    StorageCluster s;
    s.id = row.str("id");
    s.region = row.str("region");
    if (!region_known.count(s.region))
      row.fail("dangling reference to region '" + s.region + "'");
    s.power_cost = row.num("power_cost");
    s.energy_cost = row.num("energy_cost");
    s.efficiency_rt = row.num("efficiency_rt");
    s.existing_power = row.num("existing_power_mw");
    s.existing_energy = row.num("existing_energy_mwh");
    c.storage.push_back(std::move(s));
  }

  for (const auto& row : csv::read(
           dir / "lines.csv",
           {"id", "kind", "from", "to", "fine_from", "fine_to", "capacity_mw",
            "expansion_cost", "max_expansion_mw"})) {
    TransmissionLine l;
    l.id = row.str("id");
    auto kind = parse_line_kind(row.str("kind"));
    if (!kind) row.fail("unknown line kind '" + row.str("kind") + "'");
    l.kind = *kind;
    l.from = row.str("from");
    l.to = row.str("to");
    for (const auto* end : {&l.from, &l.to})
      if (!region_known.count(*end))
        row.fail("dangling reference to region '" + *end + "'");
    l.fine_from = row.str("fine_from");
    l.fine_to = row.str("fine_to");
    l.capacity = row.num("capacity_mw");
    l.expansion_cost = row.num("expansion_cost");
    l.max_expansion = row.num("max_expansion_mw");
    c.lines.push_back(std::move(l));
  }

  if (fs::exists(dir / "periods.csv")) {
    auto rows =
        csv::read(dir / "periods.csv", {"period", "weight", "is_extreme"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (row.integer("period") != static_cast<long>(i))
        row.fail("periods must be listed in order from 0");
      c.period_weights.push_back(row.num("weight"));
      c.period_extreme.push_back(row.integer("is_extreme") != 0);
      c.period_source.push_back(
          row.has("source") ? static_cast<int>(row.integer("source"))
                            : static_cast<int>(i));
    }
  } else {
    reset_periods(c);
  }

  canonicalize(c);
  refresh_derived(c);
  auto violations = validate(c);
  if (!violations.empty())
    throw InputError("invariant violation: " + describe(violations.front()));
  return c;
}

inline void write_case(const SystemCase& c, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

  {
    csv::Writer w(dir / "scalars.csv",
                  {"nse_cost", "carbon_fee", "period_length", "uc",
                   "extremes_included", "year_scale"});
    w(c.nse_cost, c.carbon_fee, c.period_length, to_string(c.uc),
      c.extremes_included, c.year_scale);
    w.close();
  }
  {
    csv::Writer w(dir / "regions.csv",
                  {"id", "urban_population", "reserve_margin"});
    for (const auto& r : c.regions) w(r.id, r.urban_population, r.reserve_margin);
    w.close();
  }
  {
    csv::Writer w(dir / "demand.csv", {"region", "hour", "mw"});
    for (const auto& r : c.regions)
      for (std::size_t t = 0; t < r.demand.size(); ++t) w(r.id, t, r.demand[t]);
    w.close();
  }
  {
    csv::Writer w(dir / "clusters.csv",
                  {"id", "region", "tech", "existing_mw", "max_new_mw",
                   "inv_cost", "fom_cost", "heat_rate", "min_output", "ramp",
                   "start_cost", "emission_factor", "fuel_cost", "vom"});
    for (const auto& k : c.clusters)
      w(k.id, k.region, to_string(k.tech), k.existing_capacity,
        k.max_new_capacity, k.inv_cost, k.fom_cost, k.heat_rate, k.min_output,
        k.ramp_rate, k.start_cost, k.emission_factor, k.fuel_cost, k.vom);
    w.close();
  }
  {
    csv::Writer w(dir / "sites.csv",
                  {"id", "fine_region", "cluster", "tech", "capacity_limit_mw",
                   "lcoe", "spur_cost", "spur_capacity_mw", "spur_sink"});
    for (const auto& s : c.sites)
      w(s.id, s.fine_region, s.cluster, to_string(s.tech), s.capacity_limit,
        s.lcoe, s.spur_cost, s.spur_capacity, s.spur_sink);
    w.close();
  }
  {
    csv::Writer w(dir / "site_profiles.csv", {"site", "hour", "cf"});
    for (const auto& s : c.sites)
      for (std::size_t t = 0; t < s.profile.size(); ++t)
        w(s.id, t, s.profile[t]);
    w.close();
  }
  {
    csv::Writer w(dir / "units.csv",
                  {"id", "fine_region", "plant", "capacity_mw", "heat_rate",
                   "min_output", "ramp", "start_cost", "emission_factor",
                   "fuel_cost", "vom"});
    for (const auto& u : c.units)
      w(u.id, u.fine_region, u.plant, u.capacity, u.heat_rate, u.min_output,
        u.ramp_rate, u.start_cost, u.emission_factor, u.fuel_cost, u.vom);
    w.close();
  }
  {
    csv::Writer w(dir / "storage.csv",
                  {"id", "region", "power_cost", "energy_cost",
                   "efficiency_rt", "existing_power_mw",
                   "existing_energy_mwh"});
    for (const auto& s : c.storage)
      w(s.id, s.region, s.power_cost, s.energy_cost, s.efficiency_rt,
        s.existing_power, s.existing_energy);
    w.close();
  }
  {
    csv::Writer w(dir / "lines.csv",
                  {"id", "kind", "from", "to", "fine_from", "fine_to",
                   "capacity_mw", "expansion_cost", "max_expansion_mw"});
    for (const auto& l : c.lines)
      w(l.id, to_string(l.kind), l.from, l.to, l.fine_from, l.fine_to,
        l.capacity, l.expansion_cost, l.max_expansion);
    w.close();
  }
  {
    csv::Writer w(dir / "periods.csv",
                  {"period", "weight", "is_extreme", "source"});
    for (std::size_t p = 0; p < c.periods(); ++p)
      w(p, c.period_weights[p], static_cast<bool>(c.period_extreme[p]),
        c.period_source[p]);
    w.close();
  }
}

}  // namespace gridres
