#pragma once

// LP formulations for the capacity-expansion phase and the production-cost
// (operations) phase. Both share one operations block; they differ in where
// the capacities come from:
//   - expansion: capacities are expressions over investment columns,
//   - Benders subproblem: capacities are fixed columns whose reduced costs
//     are the cut coefficients,
//   - operations: capacities are constants folded into bounds.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridres/core.hpp"
#include "gridres/lp/linear_program.hpp"

namespace gridres {

using lp::LinearProgram;
using lp::Sense;

// Installed capacities keyed by entity id.
struct Capacities {
  std::map<std::string, double> cluster;  // MW
  std::map<std::string, double> power;    // storage MW
  std::map<std::string, double> energy;   // storage MWh
  std::map<std::string, double> line;     // interregional MW

  bool operator==(const Capacities&) const = default;
};

inline Capacities existing_capacities(const SystemCase& c) {
  Capacities cap;
  for (const auto& k : c.clusters) cap.cluster[k.id] = k.existing_capacity;
  for (const auto& s : c.storage) {
    cap.power[s.id] = s.existing_power;
    cap.energy[s.id] = s.existing_energy;
  }
  for (const auto& l : c.lines)
    if (l.kind == LineKind::interregional) cap.line[l.id] = l.capacity;
  return cap;
}

// Annual fixed cost of holding the given capacities: investment cost on
// capacity above the existing fleet plus fixed O&M on all remaining capacity.
inline double fixed_cost(const SystemCase& c, const Capacities& cap) {
  double total = 0;
  for (const auto& k : c.clusters) {
    auto it = cap.cluster.find(k.id);
    double v = it == cap.cluster.end() ? k.existing_capacity : it->second;
    total += k.inv_cost * std::max(0.0, v - k.existing_capacity) +
             k.fom_cost * v;
  }
  for (const auto& s : c.storage) {
    auto p = cap.power.find(s.id);
    auto e = cap.energy.find(s.id);
    if (p != cap.power.end())
      total += s.power_cost * std::max(0.0, p->second - s.existing_power);
    if (e != cap.energy.end())
      total += s.energy_cost * std::max(0.0, e->second - s.existing_energy);
  }
  for (const auto& l : c.lines) {
    auto it = cap.line.find(l.id);
    if (l.kind == LineKind::interregional && it != cap.line.end())
      total += l.expansion_cost * std::max(0.0, it->second - l.capacity);
  }
  return total;
}

// constant + sum(coef * column)
struct CapExpr {
  double constant = 0;
  std::vector<std::pair<int, double>> terms;

  bool fixed() const { return terms.empty(); }
  double value(const std::vector<double>& x) const {
    double v = constant;
    for (auto [j, a] : terms) v += a * x[j];
    return v;
  }
};

struct Links {
  std::vector<CapExpr> cluster;  // aligned with case.clusters
  std::vector<CapExpr> power;    // aligned with case.storage
  std::vector<CapExpr> energy;
  std::vector<CapExpr> line;     // aligned with interregional_lines()
};

inline std::vector<int> interregional_lines(const SystemCase& c) {
  std::vector<int> out;
  for (std::size_t i = 0; i < c.lines.size(); ++i)
    if (c.lines[i].kind == LineKind::interregional)
      out.push_back(static_cast<int>(i));
  return out;
}

inline Links constant_links(const SystemCase& c, const Capacities& cap) {
  Links links;
  auto get = [](const std::map<std::string, double>& m, const std::string& id,
                double fallback) {
    auto it = m.find(id);
    return it == m.end() ? fallback : it->second;
  };
  for (const auto& k : c.clusters)
    links.cluster.push_back({get(cap.cluster, k.id, k.existing_capacity), {}});
  for (const auto& s : c.storage) {
    links.power.push_back({get(cap.power, s.id, s.existing_power), {}});
    links.energy.push_back({get(cap.energy, s.id, s.existing_energy), {}});
  }
  for (int li : interregional_lines(c)) {
    const auto& l = c.lines[li];
    links.line.push_back({get(cap.line, l.id, l.capacity), {}});
  }
  return links;
}

enum class Chronology {
  per_period,  // ramping and storage wrap within each period
  full_year,   // one cyclic sequence over all included hours
};

// Where a constant capacity enters an LP: the named bound or right-hand side
// equals coef * capacity. Used to re-parameterize a model and to read the
// capacity subgradient off its duals.
struct CapUse {
  enum Kind { row_rhs, col_lo, col_hi } kind;
  int index;
  double coef;
};

struct OpsIndex {
  std::vector<int> periods;  // source periods of the case, in order
  std::size_t hours = 0;     // local hours
  int period_length = 0;
  std::vector<int> line_ids;        // case.lines index per interregional line
  std::vector<double> hour_weight;  // objective weight per local hour
  std::vector<std::size_t> case_hour;  // local hour -> hour index in case
  // Column indices laid out [entity * hours + h]; -1 where absent.
  std::vector<int> gen, commit, start, shut;
  std::vector<int> charge, discharge, soc;
  std::vector<int> flow_fwd, flow_bwd;
  std::vector<int> nse, spill;
  std::vector<int> balance;  // rows [region * hours + h]
  // Capacity uses per link, aligned with Links (constant links only).
  std::vector<std::vector<CapUse>> cluster_uses, power_uses, energy_uses,
      line_uses;

  int at(const std::vector<int>& v, std::size_t entity, std::size_t h) const {
    return v[entity * hours + h];
  }
};

namespace detail {

// x <= coef * cap, as a bound when the capacity is a constant.
inline void upper_by_cap(LinearProgram& lp, int col, const CapExpr& cap,
                         double coef, std::vector<CapUse>& uses) {
  if (cap.fixed()) {
    lp.col_hi[col] = std::max(0.0, coef * cap.constant);
    uses.push_back({CapUse::col_hi, col, coef});
    return;
  }
  int r = lp.add_row(Sense::le, coef * cap.constant);
  lp.add(r, col, 1.0);
  for (auto [j, a] : cap.terms) lp.add(r, j, -coef * a);
}

// Adds coef * cap to a row, moving the constant to the right-hand side.
inline void add_cap(LinearProgram& lp, int row, const CapExpr& cap,
                    double coef, std::vector<CapUse>* uses = nullptr) {
  lp.rhs[row] -= coef * cap.constant;
  for (auto [j, a] : cap.terms) lp.add(row, j, coef * a);
  if (uses && cap.fixed()) uses->push_back({CapUse::row_rhs, row, -coef});
}

}  // namespace detail

// Operations block over the given periods of the case. Objective terms are
// weighted by period weight times the case's year scale.
inline OpsIndex add_operations(LinearProgram& lp, const SystemCase& c,
                               const Links& links,
                               const std::vector<int>& periods,
                               Chronology chrono, UcMode uc) {
  OpsIndex ix;
  ix.periods = periods;
  ix.period_length = c.period_length;
  ix.hours = periods.size() * static_cast<std::size_t>(c.period_length);
  ix.line_ids = interregional_lines(c);
  const std::size_t H = ix.hours;
  const std::size_t L = static_cast<std::size_t>(c.period_length);
  for (int p : periods)
    for (std::size_t h = 0; h < L; ++h) {
      ix.hour_weight.push_back(c.period_weights[p] * c.year_scale);
      ix.case_hour.push_back(static_cast<std::size_t>(p) * L + h);
    }
  auto prev = [&](std::size_t h) -> std::size_t {
    if (chrono == Chronology::full_year) return (h + H - 1) % H;
    std::size_t base = (h / L) * L;
    return base + (h - base + L - 1) % L;
  };
  const std::size_t cycle = chrono == Chronology::full_year ? H : L;

  auto region_idx = index_by_id(c.regions);
  const std::size_t K = c.clusters.size();
  const std::size_t S = c.storage.size();
  const std::size_t NL = ix.line_ids.size();
  const std::size_t R = c.regions.size();

  ix.gen.assign(K * H, -1);
  ix.commit.assign(K * H, -1);
  ix.start.assign(K * H, -1);
  ix.shut.assign(K * H, -1);
  ix.charge.assign(S * H, -1);
  ix.discharge.assign(S * H, -1);
  ix.soc.assign(S * H, -1);
  ix.flow_fwd.assign(NL * H, -1);
  ix.flow_bwd.assign(NL * H, -1);
  ix.nse.assign(R * H, -1);
  ix.spill.assign(R * H, -1);
  ix.balance.assign(R * H, -1);
  ix.cluster_uses.assign(K, {});
  ix.power_uses.assign(S, {});
  ix.energy_uses.assign(S, {});
  ix.line_uses.assign(NL, {});

  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t h = 0; h < H; ++h) {
      double d = c.regions[r].demand[ix.case_hour[h]];
      ix.balance[r * H + h] = lp.add_row(Sense::eq, d);
      int nse = lp.add_col(ix.hour_weight[h] * c.nse_cost);
      int spill = lp.add_col(0.0);
      ix.nse[r * H + h] = nse;
      ix.spill[r * H + h] = spill;
      lp.add(ix.balance[r * H + h], nse, 1.0);
      lp.add(ix.balance[r * H + h], spill, -1.0);
    }

  for (std::size_t k = 0; k < K; ++k) {
    const auto& cl = c.clusters[k];
    const std::size_t r = region_idx.at(cl.region);
    const CapExpr& cap = links.cluster[k];
    auto& uses = ix.cluster_uses[k];
    const double energy_cost =
        is_vre(cl.tech) ? cl.vom
                        : cl.marginal_cost() + c.carbon_fee * cl.emission_rate();
    for (std::size_t h = 0; h < H; ++h) {
      int g = lp.add_col(ix.hour_weight[h] * energy_cost);
      ix.gen[k * H + h] = g;
      lp.add(ix.balance[r * H + h], g, 1.0);
    }
    if (is_vre(cl.tech)) {
      for (std::size_t h = 0; h < H; ++h)
        detail::upper_by_cap(lp, ix.gen[k * H + h], cap,
                             cl.profile[ix.case_hour[h]], uses);
      continue;
    }

    const double mn = cl.min_output;
    const double rr = cl.ramp_rate;
    const bool ramps = rr < 1.0 && cycle > 1;
    if (uc == UcMode::none) {
      for (std::size_t h = 0; h < H; ++h) {
        int g = ix.gen[k * H + h];
        detail::upper_by_cap(lp, g, cap, 1.0, uses);
        if (mn > 0) {
          if (cap.fixed()) {
            lp.col_lo[g] = mn * cap.constant;
            uses.push_back({CapUse::col_lo, g, mn});
          } else {
            int row = lp.add_row(Sense::ge, 0.0);
            lp.add(row, g, 1.0);
            detail::add_cap(lp, row, cap, -mn);
          }
        }
      }
      if (ramps)
        for (std::size_t h = 0; h < H; ++h) {
          int g = ix.gen[k * H + h];
          int gp = ix.gen[k * H + prev(h)];
          int up = lp.add_row(Sense::le, 0.0);
          lp.add(up, g, 1.0);
          lp.add(up, gp, -1.0);
          detail::add_cap(lp, up, cap, -rr, &uses);
          int dn = lp.add_row(Sense::le, 0.0);
          lp.add(dn, gp, 1.0);
          lp.add(dn, g, -1.0);
          detail::add_cap(lp, dn, cap, -rr, &uses);
        }
      continue;
    }

    // Relaxed (continuous) commitment.
    for (std::size_t h = 0; h < H; ++h) {
      int u = lp.add_col(0.0);
      int su = lp.add_col(ix.hour_weight[h] * cl.start_cost);
      int sd = lp.add_col(0.0);
      ix.commit[k * H + h] = u;
      ix.start[k * H + h] = su;
      ix.shut[k * H + h] = sd;
      detail::upper_by_cap(lp, u, cap, 1.0, uses);
      int g = ix.gen[k * H + h];
      int hi = lp.add_row(Sense::le, 0.0);
      lp.add(hi, g, 1.0);
      lp.add(hi, u, -1.0);
      if (mn > 0) {
        int lo = lp.add_row(Sense::ge, 0.0);
        lp.add(lo, g, 1.0);
        lp.add(lo, u, -mn);
      }
    }
    if (cycle > 1)
      for (std::size_t h = 0; h < H; ++h) {
        int row = lp.add_row(Sense::eq, 0.0);
        lp.add(row, ix.commit[k * H + h], 1.0);
        lp.add(row, ix.commit[k * H + prev(h)], -1.0);
        lp.add(row, ix.start[k * H + h], -1.0);
        lp.add(row, ix.shut[k * H + h], 1.0);
      }
    if (ramps) {
      const double big = std::max(mn, rr);
      for (std::size_t h = 0; h < H; ++h) {
        int g = ix.gen[k * H + h];
        int gp = ix.gen[k * H + prev(h)];
        int u = ix.commit[k * H + h];
        int su = ix.start[k * H + h];
        int sd = ix.shut[k * H + h];
        int up = lp.add_row(Sense::le, 0.0);
        lp.add(up, g, 1.0);
        lp.add(up, gp, -1.0);
        lp.add(up, u, -rr);
        lp.add(up, su, rr - big);
        lp.add(up, sd, mn);
        int dn = lp.add_row(Sense::le, 0.0);
        lp.add(dn, gp, 1.0);
        lp.add(dn, g, -1.0);
        lp.add(dn, u, -rr);
        lp.add(dn, su, rr + mn);
        lp.add(dn, sd, -big);
      }
    }
  }

  for (std::size_t s = 0; s < S; ++s) {
    const auto& st = c.storage[s];
    const std::size_t r = region_idx.at(st.region);
    const double eff = std::sqrt(st.efficiency_rt);
    for (std::size_t h = 0; h < H; ++h) {
      int ch = lp.add_col(0.0);
      int dis = lp.add_col(0.0);
      int soc = lp.add_col(0.0);
      ix.charge[s * H + h] = ch;
      ix.discharge[s * H + h] = dis;
      ix.soc[s * H + h] = soc;
      detail::upper_by_cap(lp, ch, links.power[s], 1.0, ix.power_uses[s]);
      detail::upper_by_cap(lp, dis, links.power[s], 1.0, ix.power_uses[s]);
      detail::upper_by_cap(lp, soc, links.energy[s], 1.0, ix.energy_uses[s]);
      lp.add(ix.balance[r * H + h], dis, 1.0);
      lp.add(ix.balance[r * H + h], ch, -1.0);
    }
    for (std::size_t h = 0; h < H; ++h) {
      int row = lp.add_row(Sense::eq, 0.0);
      lp.add(row, ix.soc[s * H + h], 1.0);
      if (prev(h) != h) lp.add(row, ix.soc[s * H + prev(h)], -1.0);
      lp.add(row, ix.charge[s * H + h], -eff);
      lp.add(row, ix.discharge[s * H + h], 1.0 / eff);
    }
  }

  for (std::size_t li = 0; li < NL; ++li) {
    const auto& line = c.lines[ix.line_ids[li]];
    const std::size_t rf = region_idx.at(line.from);
    const std::size_t rt = region_idx.at(line.to);
    for (std::size_t h = 0; h < H; ++h) {
      int f = lp.add_col(0.0);
      int b = lp.add_col(0.0);
      ix.flow_fwd[li * H + h] = f;
      ix.flow_bwd[li * H + h] = b;
      detail::upper_by_cap(lp, f, links.line[li], 1.0, ix.line_uses[li]);
      detail::upper_by_cap(lp, b, links.line[li], 1.0, ix.line_uses[li]);
      lp.add(ix.balance[rf * H + h], f, -1.0);
      lp.add(ix.balance[rt * H + h], f, 1.0);
      lp.add(ix.balance[rf * H + h], b, 1.0);
      lp.add(ix.balance[rt * H + h], b, -1.0);
    }
  }
  return ix;
}

struct InvestIndex {
  std::vector<int> new_cap, retire;           // per cluster (-1: none)
  std::vector<int> new_power, new_energy;     // per storage
  std::vector<int> line_exp;                  // per interregional line
  std::vector<int> reserve;                   // per region (-1: none)
};

// Investment columns with their fixed costs; fills `links` with the implied
// capacity expressions.
inline InvestIndex add_investment(LinearProgram& lp, const SystemCase& c,
                                  Links& links) {
  InvestIndex ix;
  links = Links{};
  for (const auto& k : c.clusters) {
    lp.obj_constant += k.fom_cost * k.existing_capacity;
    CapExpr e{k.existing_capacity, {}};
    int nc = -1, rt = -1;
    if (k.max_new_capacity > 0) {
      nc = lp.add_col(k.inv_cost + k.fom_cost, 0.0, k.max_new_capacity);
      e.terms.push_back({nc, 1.0});
    }
    if (k.existing_capacity > 0) {
      rt = lp.add_col(-k.fom_cost, 0.0, k.existing_capacity);
      e.terms.push_back({rt, -1.0});
    }
    ix.new_cap.push_back(nc);
    ix.retire.push_back(rt);
    links.cluster.push_back(std::move(e));
  }
  for (const auto& s : c.storage) {
    int p = lp.add_col(s.power_cost);
    int e = lp.add_col(s.energy_cost);
    ix.new_power.push_back(p);
    ix.new_energy.push_back(e);
    links.power.push_back({s.existing_power, {{p, 1.0}}});
    links.energy.push_back({s.existing_energy, {{e, 1.0}}});
  }
  for (int li : interregional_lines(c)) {
    const auto& l = c.lines[li];
    CapExpr e{l.capacity, {}};
    int x = -1;
    if (l.max_expansion > 0) {
      x = lp.add_col(l.expansion_cost, 0.0, l.max_expansion);
      e.terms.push_back({x, 1.0});
    }
    ix.line_exp.push_back(x);
    links.line.push_back(std::move(e));
  }
  return ix;
}

// Per-region firm capacity >= (1 + margin) * peak demand over modeled hours.
// VRE is credited at its maximum modeled availability, storage at power.
inline void add_reserve(LinearProgram& lp, const SystemCase& c,
                        const Links& links, InvestIndex& ix) {
  auto region_idx = index_by_id(c.regions);
  ix.reserve.assign(c.regions.size(), -1);
  for (std::size_t r = 0; r < c.regions.size(); ++r) {
    const auto& reg = c.regions[r];
    double peak = 0;
    for (double d : reg.demand) peak = std::max(peak, d);
    if (peak <= 0) continue;
    int row = lp.add_row(Sense::ge, (1.0 + reg.reserve_margin) * peak);
    ix.reserve[r] = row;
    for (std::size_t k = 0; k < c.clusters.size(); ++k) {
      const auto& cl = c.clusters[k];
      if (region_idx.at(cl.region) != r) continue;
      double credit = 1.0;
      if (is_vre(cl.tech)) {
        credit = 0;
        for (double v : cl.profile) credit = std::max(credit, v);
      }
      detail::add_cap(lp, row, links.cluster[k], credit);
    }
    for (std::size_t s = 0; s < c.storage.size(); ++s)
      if (region_idx.at(c.storage[s].region) == r)
        detail::add_cap(lp, row, links.power[s], 1.0);
  }
}

inline std::vector<int> all_periods(const SystemCase& c) {
  std::vector<int> p(c.periods());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<int>(i);
  return p;
}

struct ExpansionModel {
  LinearProgram lp;
  InvestIndex invest;
  Links links;
  OpsIndex ops;
};

inline ExpansionModel build_expansion_lp(const SystemCase& c, UcMode uc,
                                         bool reserve) {
  ExpansionModel m;
  m.invest = add_investment(m.lp, c, m.links);
  if (reserve) add_reserve(m.lp, c, m.links, m.invest);
  m.ops = add_operations(m.lp, c, m.links, all_periods(c),
                         Chronology::per_period, uc);
  return m;
}

struct OperationsModel {
  LinearProgram lp;
  OpsIndex ops;
  Capacities capacities;
};

// Production-cost LP: capacities fixed, no reserve, full-year chronology.
// The objective constant carries the fixed cost of the capacities so the
// optimum equals total system cost.
inline OperationsModel build_operations_lp(const SystemCase& c,
                                           const Capacities& cap, UcMode uc) {
  for (const auto& [id, v] : cap.cluster)
    if (!find_by_id(c.clusters, id))
      throw Error("portfolio/case mismatch: unknown cluster '" + id + "'");
  for (const auto& [id, v] : cap.power)
    if (!find_by_id(c.storage, id))
      throw Error("portfolio/case mismatch: unknown storage '" + id + "'");
  for (const auto& [id, v] : cap.line)
    if (!find_by_id(c.lines, id))
      throw Error("portfolio/case mismatch: unknown line '" + id + "'");
  for (const auto& k : c.clusters)
    if (!cap.cluster.count(k.id))
      throw Error("portfolio/case mismatch: no capacity for cluster '" + k.id +
                  "'");
  OperationsModel m;
  m.capacities = cap;
  Links links = constant_links(c, cap);
  m.lp.obj_constant = fixed_cost(c, cap);
  m.ops = add_operations(m.lp, c, links, all_periods(c), Chronology::full_year,
                         uc);
  return m;
}

}  // namespace gridres
