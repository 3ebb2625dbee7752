#pragma once

// Small hand-built cases with known optima.

#include <string>
#include <vector>

#include "gridres/core.hpp"
#include "gridres/io.hpp"
#include "gridres/syngen.hpp"

namespace gridres::testing {

inline ResourceCluster gas_cluster(const std::string& region, double existing,
                                   double max_new) {
  ResourceCluster k;
  k.id = region + "_natural_gas";
  k.region = region;
  k.tech = Tech::natural_gas;
  k.existing_capacity = existing;
  k.max_new_capacity = max_new;
  k.inv_cost = 100;
  k.heat_rate = 10;
  k.fuel_cost = 2;
  k.vom = 5;  // marginal cost 25 $/MWh
  k.emission_factor = 0.05;
  return k;
}

inline ThermalUnit unit_for(const ResourceCluster& k, const std::string& id,
                            double mw) {
  ThermalUnit u;
  u.id = id;
  u.fine_region = k.region;
  u.plant = k.id;
  u.capacity = mw;
  u.heat_rate = k.heat_rate;
  u.min_output = k.min_output;
  u.ramp_rate = k.ramp_rate;
  u.emission_factor = k.emission_factor;
  u.fuel_cost = k.fuel_cost;
  u.vom = k.vom;
  return u;
}

inline Region region(const std::string& id, std::vector<double> demand,
                     double population = 1e6) {
  Region r;
  r.id = id;
  r.urban_population = population;
  r.demand = std::move(demand);
  return r;
}

// One region, one expandable gas cluster with nothing existing.
inline SystemCase single_thermal(std::vector<double> demand, double reserve = 0) {
  SystemCase c;
  c.period_length = static_cast<int>(demand.size());
  c.regions.push_back(region("A", std::move(demand)));
  c.regions.back().reserve_margin = reserve;
  c.clusters.push_back(gas_cluster("A", 0, 1000));
  reset_periods(c);
  return c;
}

// Gas in A exporting over a fixed line to load-only B.
inline SystemCase import_pair(double line_mw, double demand_a, double demand_b,
                              int hours = 4) {
  SystemCase c;
  c.period_length = hours;
  c.regions.push_back(region("A", std::vector<double>(hours, demand_a)));
  c.regions.push_back(region("B", std::vector<double>(hours, demand_b)));
  c.clusters.push_back(gas_cluster("A", 100, 0));
  c.units.push_back(unit_for(c.clusters.back(), "A_u1", 100));
  TransmissionLine l;
  l.id = "A-B";
  l.from = l.fine_from = "A";
  l.to = l.fine_to = "B";
  l.capacity = line_mw;
  c.lines.push_back(l);
  reset_periods(c);
  return c;
}

inline SystemCase synthetic(std::uint64_t seed, int regions, int periods,
                            Pathway pathway = Pathway::bau) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_fine_regions = regions;
  cfg.periods = periods;
  cfg.pathway = pathway;
  return generate(cfg);
}

}  // namespace gridres::testing
