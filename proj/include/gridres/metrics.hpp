#pragma once

// Scoring of a case against the high-resolution baseline.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "gridres/core.hpp"
#include "gridres/csv.hpp"
#include "gridres/dispatch.hpp"
#include "gridres/expansion.hpp"
#include "gridres/operations.hpp"
#include "gridres/translate.hpp"

namespace gridres {

// Capacity-weighted intersection over union of two site allocations.
inline double sco(const std::map<std::string, double>& a,
                  const std::map<std::string, double>& b) {
  double inter = 0, uni = 0;
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    double x = 0, y = 0;
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      x = (ia++)->second;
    } else if (ia == a.end() || ib->first < ia->first) {
      y = (ib++)->second;
    } else {
      x = (ia++)->second;
      y = (ib++)->second;
    }
    inter += std::min(x, y);
    uni += std::max(x, y);
  }
  return uni > 0 ? 100.0 * (inter / uni) : 100.0;
}

inline double sco(const SiteAllocation& a, const SiteAllocation& b,
                  const SystemCase& fine, const std::function<bool(Tech)>& keep) {
  auto filter = [&](const SiteAllocation& s) {
    std::map<std::string, double> out;
    for (const auto& [id, mw] : s.site_mw) {
      const Site* site = find_by_id(fine.sites, id);
      if (!site) throw Error("sco: site '" + id + "' outside the site universe");
      if (keep(site->tech)) out[id] = mw;
    }
    return out;
  };
  return sco(filter(a), filter(b));
}

inline double sco(const SiteAllocation& a, const SiteAllocation& b,
                  const SystemCase& fine, Tech t) {
  return sco(a, b, fine, [t](Tech x) { return x == t; });
}

namespace detail {

template <typename Scale>
std::vector<double> matched_diffs(const std::map<std::string, double>& v,
                                  const std::map<std::string, double>& ref,
                                  const char* what, Scale scale) {
  if (v.size() != ref.size())
    throw Error(std::string(what) + ": mismatched universes");
  std::vector<double> d;
  for (const auto& [k, x] : v) {
    auto it = ref.find(k);
    if (it == ref.end())
      throw Error(std::string(what) + ": '" + k + "' missing from baseline");
    d.push_back(scale(x) - scale(it->second));
  }
  return d;
}

inline double root_sum_sq(const std::vector<double>& d) {
  double s = 0;
  for (double x : d) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

// sqrt(sum of squared GW differences) / line count.
inline double mse_lines(const std::map<std::string, double>& mw,
                        const std::map<std::string, double>& hrb_mw) {
  auto d = detail::matched_diffs(mw, hrb_mw, "mse_lines",
                                 [](double x) { return x / 1000.0; });
  return d.empty() ? 0.0 : detail::root_sum_sq(d) / d.size();
}

// sqrt(sum of squared differences) / region count.
inline double mse_regional(const std::map<std::string, double>& v,
                           const std::map<std::string, double>& hrb) {
  auto d = detail::matched_diffs(v, hrb, "mse_regional", [](double x) { return x; });
  return d.empty() ? 0.0 : detail::root_sum_sq(d) / d.size();
}

inline double rmse(const std::map<std::string, double>& v,
                   const std::map<std::string, double>& hrb, double scale = 1) {
  auto d = detail::matched_diffs(v, hrb, "rmse",
                                 [scale](double x) { return x * scale; });
  return d.empty() ? 0.0 : detail::root_sum_sq(d) / std::sqrt(double(d.size()));
}

struct Financials {
  CostBreakdown costs;  // carbon holds the abatement fee
  std::map<std::string, double> profit, emissions, nse;  // per region
};

// Profit excludes fixed costs: energy revenue at the regional price minus
// fuel, VOM, start and abatement costs of the region's generators.
inline Financials financials(const SystemCase& c, const OperationsResult& ops) {
  if (ops.status != lp::Status::optimal)
    throw Error("financials: operations solution is not optimal");
  const Dispatch& d = ops.dispatch;
  Financials f;
  f.costs = ops.costs;
  f.emissions = emissions_by_region(c, d);
  for (const auto& r : c.regions) {
    f.profit[r.id] = 0;
    double n = 0;
    const auto& s = d.nse.at(r.id);
    for (std::size_t h = 0; h < d.hours(); ++h) n += d.weight[h] * s[h];
    f.nse[r.id] = n;
  }
  for (const auto& k : c.clusters) {
    const auto& g = d.gen.at(k.id);
    const auto& su = d.start.at(k.id);
    const auto& p = d.price.at(k.region);
    double mc = is_vre(k.tech)
                    ? k.vom
                    : k.marginal_cost() + c.carbon_fee * k.emission_rate();
    double v = 0;
    for (std::size_t h = 0; h < d.hours(); ++h)
      v += d.weight[h] * ((p[h] - mc) * g[h] - k.start_cost * su[h]);
    f.profit[k.region] += v;
  }
  return f;
}

// Mean price by hour of day over the whole run.
inline std::map<std::string, std::array<double, 24>> hour_of_day_prices(
    const Dispatch& d) {
  std::map<std::string, std::array<double, 24>> out;
  for (const auto& [r, p] : d.price) {
    std::array<double, 24> sum{}, n{};
    for (std::size_t h = 0; h < p.size(); ++h) {
      sum[h % 24] += p[h];
      n[h % 24] += 1;
    }
    for (int i = 0; i < 24; ++i) sum[i] = n[i] > 0 ? sum[i] / n[i] : 0.0;
    out[r] = sum;
  }
  return out;
}

struct PhaseDelta {
  double predicted = 0, actual = 0;
  double delta() const { return actual - predicted; }
};

struct PhaseComparison {
  std::map<Tech, PhaseDelta> generation;  // MWh
  PhaseDelta variable_cost;               // $, incl. abatement
};

inline PhaseComparison phase_compare(const std::map<Tech, double>& predicted,
                                     double predicted_variable,
                                     const SystemCase& hr_case,
                                     const OperationsResult& ops) {
  PhaseComparison out;
  for (auto t : kAllTechs) out.generation[t] = {};
  for (const auto& [t, e] : predicted) out.generation[t].predicted = e;
  for (const auto& [t, e] : generation_by_tech(hr_case, ops.dispatch))
    out.generation[t].actual = e;
  out.variable_cost = {predicted_variable, ops.costs.variable + ops.costs.carbon};
  return out;
}

inline PhaseComparison phase_compare(const SystemCase& phase1_case,
                                     const ExpansionSolution& exp,
                                     const SystemCase& hr_case,
                                     const OperationsResult& ops) {
  return phase_compare(generation_by_tech(phase1_case, exp.dispatch),
                       exp.costs.variable + exp.costs.carbon, hr_case, ops);
}

struct MetricsReport {
  std::string case_name;
  std::map<Tech, double> sco;  // %
  double sco_wind = 100;       // all wind technologies together
  double mse_cap = 0, mse_profit = 0, mse_emiss = 0;
  double rmse_cap = 0, rmse_profit = 0, rmse_emiss = 0;
  Financials fin;
  std::map<std::string, double> line_capacity;  // MW
  std::map<std::string, std::array<double, 24>> hourly_price;
  PhaseComparison phase;

  double total_cost() const { return fin.costs.total(); }
  double total_nse() const {
    double s = 0;
    for (const auto& [r, v] : fin.nse) s += v;
    return s;
  }
  double total_emissions() const {
    double s = 0;
    for (const auto& [r, v] : fin.emissions) s += v;
    return s;
  }
};

// Everything a case contributes to its report, independent of the baseline.
struct CaseOutcome {
  SiteAllocation allocation;
  std::map<std::string, double> line_capacity;  // fine lines, MW
  Financials fin;
  std::map<std::string, std::array<double, 24>> hourly_price;
  PhaseComparison phase;
};

inline CaseOutcome summarize_case(const SiteAllocation& alloc,
                                  const SystemCase& hr_case,
                                  const OperationsResult& ops,
                                  PhaseComparison phase) {
  CaseOutcome o;
  o.allocation = alloc;
  o.line_capacity = ops.capacities.line;
  o.fin = financials(hr_case, ops);
  o.hourly_price = hour_of_day_prices(ops.dispatch);
  o.phase = std::move(phase);
  return o;
}

inline MetricsReport make_report(const std::string& name, const SystemCase& fine,
                                 const CaseOutcome& c, const CaseOutcome& hrb) {
  MetricsReport r;
  r.case_name = name;
  for (auto t : kAllTechs)
    if (is_vre(t)) r.sco[t] = sco(c.allocation, hrb.allocation, fine, t);
  r.sco_wind = sco(c.allocation, hrb.allocation, fine,
                   [](Tech t) { return is_wind(t); });
  r.line_capacity = c.line_capacity;
  const auto& hl = hrb.line_capacity;
  r.mse_cap = mse_lines(r.line_capacity, hl);
  r.rmse_cap = rmse(r.line_capacity, hl, 1e-3);
  r.mse_profit = mse_regional(c.fin.profit, hrb.fin.profit);
  r.rmse_profit = rmse(c.fin.profit, hrb.fin.profit);
  r.mse_emiss = mse_regional(c.fin.emissions, hrb.fin.emissions);
  r.rmse_emiss = rmse(c.fin.emissions, hrb.fin.emissions);
  r.fin = c.fin;
  r.hourly_price = c.hourly_price;
  r.phase = c.phase;
  return r;
}

// Long format: case, metric, key, value. Profit excludes fixed costs.
inline void write_report_rows(csv::Writer& w, const MetricsReport& r) {
  auto put = [&](const std::string& metric, const std::string& key, double v) {
    w(r.case_name, metric, key, v);
  };
  for (const auto& [t, v] : r.sco) put("sco", std::string(to_string(t)), v);
  put("sco", "wind", r.sco_wind);
  put("mse_cap_gw", "", r.mse_cap);
  put("rmse_cap_gw", "", r.rmse_cap);
  put("mse_profit", "", r.mse_profit);
  put("rmse_profit", "", r.rmse_profit);
  put("mse_emiss", "", r.mse_emiss);
  put("rmse_emiss", "", r.rmse_emiss);
  put("cost", "fixed", r.fin.costs.fixed);
  put("cost", "variable", r.fin.costs.variable);
  put("cost", "nse", r.fin.costs.nse);
  put("cost", "abatement_fee", r.fin.costs.carbon);
  put("cost", "total", r.total_cost());
  for (const auto& [k, v] : r.fin.nse) put("nse_mwh", k, v);
  for (const auto& [k, v] : r.fin.emissions) put("emissions_t", k, v);
  for (const auto& [k, v] : r.fin.profit) put("profit_excl_fixed", k, v);
  for (const auto& [k, v] : r.line_capacity) put("line_mw", k, v);
  for (const auto& [k, a] : r.hourly_price)
    for (int h = 0; h < 24; ++h) put("price_hod", k + ":" + std::to_string(h), a[h]);
  for (const auto& [t, d] : r.phase.generation) {
    std::string k(to_string(t));
    put("phase1_mwh", k, d.predicted);
    put("phase2_mwh", k, d.actual);
    put("phase_delta_mwh", k, d.delta());
  }
  put("phase_delta_cost", "variable", r.phase.variable_cost.delta());
}

inline void write_report(const std::vector<MetricsReport>& reports,
                         const fs::path& path) {
  csv::Writer w(path, {"case", "metric", "key", "value"});
  for (const auto& r : reports) write_report_rows(w, r);
  w.close();
}

inline void print_summary(const std::vector<MetricsReport>& reports,
                          std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %9s %9s %10s %14s %12s %12s\n", "case",
                "sco_solar", "sco_wind", "mse_cap_gw", "total_cost", "nse_mwh",
                "co2_t");
  out << buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-24s %9.2f %9.2f %10.4f %14.6g %12.6g %12.6g\n",
                  r.case_name.c_str(), r.sco.at(Tech::solar), r.sco_wind,
                  r.mse_cap, r.total_cost(), r.total_nse(), r.total_emissions());
    out << buf;
  }
}

}  // namespace gridres
