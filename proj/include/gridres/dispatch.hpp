#pragma once

// Hourly operating results read back from a solved operations block, and the
// cost and emissions accounting over them.

#include <map>
#include <string>
#include <vector>

#include "gridres/core.hpp"
#include "gridres/lp/linear_program.hpp"
#include "gridres/model.hpp"

namespace gridres {

using Series = std::vector<double>;

struct Dispatch {
  std::vector<double> weight;  // per hour
  std::map<std::string, Series> gen, start;          // per cluster
  std::map<std::string, Series> charge, discharge;   // per storage
  std::map<std::string, Series> flow;                // per line, from -> to
  std::map<std::string, Series> nse, spill, price;   // per region

  std::size_t hours() const { return weight.size(); }

  // Appends another block of hours.
  void append(const Dispatch& o) {
    auto cat = [](std::map<std::string, Series>& a,
                  const std::map<std::string, Series>& b) {
      for (const auto& [k, v] : b) a[k].insert(a[k].end(), v.begin(), v.end());
    };
    weight.insert(weight.end(), o.weight.begin(), o.weight.end());
    cat(gen, o.gen);
    cat(start, o.start);
    cat(charge, o.charge);
    cat(discharge, o.discharge);
    cat(flow, o.flow);
    cat(nse, o.nse);
    cat(spill, o.spill);
    cat(price, o.price);
  }
};

// Prices are balance-row duals divided by the hour weight, in $/MWh.
inline Dispatch extract_dispatch(const SystemCase& c, const OpsIndex& ix,
                                 const lp::Solution& sol) {
  if (sol.status != lp::Status::optimal)
    throw Error("extract_dispatch: solution is not optimal");
  Dispatch d;
  d.weight = ix.hour_weight;
  const std::size_t H = ix.hours;
  auto take = [&](const std::vector<int>& cols, std::size_t e) {
    Series s(H, 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      int j = cols[e * H + h];
      if (j >= 0) s[h] = sol.x[j];
    }
    return s;
  };
  for (std::size_t k = 0; k < c.clusters.size(); ++k) {
    d.gen[c.clusters[k].id] = take(ix.gen, k);
    d.start[c.clusters[k].id] = take(ix.start, k);
  }
  for (std::size_t s = 0; s < c.storage.size(); ++s) {
    d.charge[c.storage[s].id] = take(ix.charge, s);
    d.discharge[c.storage[s].id] = take(ix.discharge, s);
  }
  for (std::size_t l = 0; l < ix.line_ids.size(); ++l) {
    Series f = take(ix.flow_fwd, l), b = take(ix.flow_bwd, l);
    for (std::size_t h = 0; h < H; ++h) f[h] -= b[h];
    d.flow[c.lines[ix.line_ids[l]].id] = std::move(f);
  }
  for (std::size_t r = 0; r < c.regions.size(); ++r) {
    const auto& id = c.regions[r].id;
    d.nse[id] = take(ix.nse, r);
    d.spill[id] = take(ix.spill, r);
    Series p(H);
    for (std::size_t h = 0; h < H; ++h)
      p[h] = sol.row_dual[ix.balance[r * H + h]] / ix.hour_weight[h];
    d.price[id] = std::move(p);
  }
  return d;
}

struct CostBreakdown {
  double fixed = 0;
  double variable = 0;  // fuel + VOM + start
  double nse = 0;
  double carbon = 0;    // abatement fee

  double total() const { return fixed + variable + nse + carbon; }
};

// Weighted operating costs of a dispatch. Fixed cost is left at zero.
inline CostBreakdown operating_costs(const SystemCase& c, const Dispatch& d) {
  CostBreakdown out;
  for (const auto& k : c.clusters) {
    const auto& g = d.gen.at(k.id);
    const auto& su = d.start.at(k.id);
    double energy = is_vre(k.tech) ? k.vom : k.marginal_cost();
    for (std::size_t h = 0; h < d.hours(); ++h) {
      out.variable += d.weight[h] * (energy * g[h] + k.start_cost * su[h]);
      if (!is_vre(k.tech))
        out.carbon += d.weight[h] * c.carbon_fee * k.emission_rate() * g[h];
    }
  }
  for (const auto& r : c.regions) {
    const auto& n = d.nse.at(r.id);
    for (std::size_t h = 0; h < d.hours(); ++h)
      out.nse += d.weight[h] * c.nse_cost * n[h];
  }
  return out;
}

// tCO2 per region: generation * heat_rate * emission_factor.
inline std::map<std::string, double> emissions_by_region(const SystemCase& c,
                                                         const Dispatch& d) {
  std::map<std::string, double> out;
  for (const auto& r : c.regions) out[r.id] = 0;
  for (const auto& k : c.clusters) {
    if (is_vre(k.tech)) continue;
    const auto& g = d.gen.at(k.id);
    for (std::size_t h = 0; h < d.hours(); ++h)
      out[k.region] += d.weight[h] * g[h] * k.heat_rate * k.emission_factor;
  }
  return out;
}

// Weighted MWh per technology.
inline std::map<Tech, double> generation_by_tech(const SystemCase& c,
                                                 const Dispatch& d) {
  std::map<Tech, double> out;
  for (const auto& k : c.clusters) {
    double& e = out[k.tech];
    const auto& g = d.gen.at(k.id);
    for (std::size_t h = 0; h < d.hours(); ++h) e += d.weight[h] * g[h];
  }
  return out;
}

}  // namespace gridres
