#pragma once

// Phase-1 capacity expansion: monolithic solve and multi-cut Benders
// decomposition over representative periods.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "gridres/core.hpp"
#include "gridres/csv.hpp"
#include "gridres/dispatch.hpp"
#include "gridres/lp/simplex.hpp"
#include "gridres/model.hpp"

namespace gridres {

struct ExpansionSolution {
  lp::Status status = lp::Status::failed;
  bool converged = false;
  std::string message;
  std::map<std::string, double> new_capacity, retirement;  // per cluster
  std::map<std::string, double> new_power, new_energy;     // per storage
  std::map<std::string, double> line_expansion;
  Capacities capacities;
  Dispatch dispatch;
  CostBreakdown costs;
  double objective = 0;
};

namespace detail {

inline double col_value(const std::vector<double>& x, int j) {
  return j >= 0 ? x[j] : 0.0;
}

// Investment decisions and resulting capacities at master point x.
inline void read_investment(const SystemCase& c, const InvestIndex& inv,
                            const Links& links, const std::vector<double>& x,
                            ExpansionSolution& out) {
  for (std::size_t k = 0; k < c.clusters.size(); ++k) {
    const auto& id = c.clusters[k].id;
    out.new_capacity[id] = col_value(x, inv.new_cap[k]);
    out.retirement[id] = col_value(x, inv.retire[k]);
    out.capacities.cluster[id] = std::max(0.0, links.cluster[k].value(x));
  }
  for (std::size_t s = 0; s < c.storage.size(); ++s) {
    const auto& id = c.storage[s].id;
    out.new_power[id] = col_value(x, inv.new_power[s]);
    out.new_energy[id] = col_value(x, inv.new_energy[s]);
    out.capacities.power[id] = links.power[s].value(x);
    out.capacities.energy[id] = links.energy[s].value(x);
  }
  auto lines = interregional_lines(c);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto& id = c.lines[lines[l]].id;
    out.line_expansion[id] = col_value(x, inv.line_exp[l]);
    out.capacities.line[id] = links.line[l].value(x);
  }
}

// Objective contribution of the investment block at x.
inline double investment_cost(const LinearProgram& lp, const InvestIndex& inv,
                              const std::vector<double>& x) {
  double v = lp.obj_constant;
  auto add = [&](int j) {
    if (j >= 0) v += lp.obj[j] * x[j];
  };
  for (int j : inv.new_cap) add(j);
  for (int j : inv.retire) add(j);
  for (int j : inv.new_power) add(j);
  for (int j : inv.new_energy) add(j);
  for (int j : inv.line_exp) add(j);
  return v;
}

}  // namespace detail

inline ExpansionSolution solve_expansion_monolithic(
    const SystemCase& c, UcMode uc, bool reserve,
    lp::SimplexOptions opts = {}) {
  auto m = build_expansion_lp(c, uc, reserve);
  auto sol = lp::solve_simplex(m.lp, opts);
  ExpansionSolution out;
  out.status = sol.status;
  out.message = sol.message;
  if (sol.status != lp::Status::optimal) return out;
  out.converged = true;
  detail::read_investment(c, m.invest, m.links, sol.x, out);
  out.dispatch = extract_dispatch(c, m.ops, sol);
  out.costs = operating_costs(c, out.dispatch);
  out.costs.fixed = detail::investment_cost(m.lp, m.invest, sol.x);
  out.objective = sol.objective;
  return out;
}

struct BendersConfig {
  int max_iter = 500;
  double gap_tol = 1e-4;
  double stab_weight = 0;  // weight on the incumbent in the evaluation point
  int sub_jobs = 1;
};

struct BendersIteration {
  int iteration;
  double lower, upper, gap;
};

struct BendersCut {
  int period;
  double value;                 // subproblem optimum at the evaluated point
  std::vector<double> capacity; // evaluated link capacities
  std::vector<double> slope;    // subgradient per link
};

struct BendersState {
  int iterations = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double stab_weight = 0;
  bool converged = false;
  std::vector<BendersCut> cuts;
  std::vector<BendersIteration> log;

  double gap() const {
    return (upper - lower) / std::max(1.0, std::abs(upper));
  }
};

inline void write_benders_log(const BendersState& st, std::ostream& out) {
  out << "iteration,lower_bound,upper_bound,gap\n";
  for (const auto& it : st.log)
    out << it.iteration << ',' << csv::fmt(it.lower) << ','
        << csv::fmt(it.upper) << ',' << csv::fmt(it.gap) << '\n';
}

namespace detail {

// All links of a case flattened: clusters, storage power, storage energy,
// interregional lines.
inline std::vector<const CapExpr*> flatten(const Links& l) {
  std::vector<const CapExpr*> out;
  for (const auto* v : {&l.cluster, &l.power, &l.energy, &l.line})
    for (const auto& e : *v) out.push_back(&e);
  return out;
}

inline std::vector<const std::vector<CapUse>*> flatten_uses(const OpsIndex& ix) {
  std::vector<const std::vector<CapUse>*> out;
  for (const auto* v : {&ix.cluster_uses, &ix.power_uses, &ix.energy_uses,
                        &ix.line_uses})
    for (const auto& e : *v) out.push_back(&e);
  return out;
}

// Operations of one representative period with constant capacities held as
// bounds and right-hand sides. Keeps its basis across capacity updates.
class PeriodSubproblem {
 public:
  PeriodSubproblem(const SystemCase& c, int period, UcMode uc)
      : case_(&c) {
    LinearProgram lp;
    ix_ = add_operations(lp, c, constant_links(c, existing_capacities(c)),
                         {period}, Chronology::per_period, uc);
    uses_ = flatten_uses(ix_);
    solver_ = std::make_unique<lp::SimplexSolver>(std::move(lp));
  }

  struct Result {
    lp::Solution sol;
    double value = 0;
    std::vector<double> slope;
  };

  Result solve(const std::vector<double>& cap) {
    const auto& lp = solver_->lp();
    for (std::size_t i = 0; i < uses_.size(); ++i)
      for (const auto& u : *uses_[i]) {
        double v = u.coef * cap[i];
        switch (u.kind) {
          case CapUse::row_rhs:
            solver_->set_row_rhs(u.index, v);
            break;
          case CapUse::col_lo:
            solver_->set_col_bounds(u.index, v, lp.col_hi[u.index]);
            break;
          case CapUse::col_hi:
            solver_->set_col_bounds(u.index, lp.col_lo[u.index],
                                    std::max(0.0, v));
            break;
        }
      }
    Result r;
    r.sol = solver_->solve();
    if (r.sol.status != lp::Status::optimal) return r;
    r.value = r.sol.objective;
    r.slope.assign(uses_.size(), 0.0);
    for (std::size_t i = 0; i < uses_.size(); ++i)
      for (const auto& u : *uses_[i]) {
        double g = 0;
        if (u.kind == CapUse::row_rhs) {
          g = r.sol.row_dual[u.index];
        } else {
          double d = r.sol.reduced_cost[u.index];
          if (u.kind == CapUse::col_hi) g = std::min(d, 0.0);
          else g = std::max(d, 0.0);
        }
        r.slope[i] += u.coef * g;
      }
    return r;
  }

  Dispatch dispatch(const lp::Solution& sol) const {
    return extract_dispatch(*case_, ix_, sol);
  }

 private:
  const SystemCase* case_;
  OpsIndex ix_;
  std::vector<const std::vector<CapUse>*> uses_;
  std::unique_ptr<lp::SimplexSolver> solver_;
};

}  // namespace detail

// Master: investment block, optional reserve, one cost variable per period.
// Subproblem p: period p operations at the master's capacities. Cuts are
// added in period order so results do not depend on thread timing.
inline ExpansionSolution solve_benders(const SystemCase& c, UcMode uc,
                                       bool reserve, const BendersConfig& cfg,
                                       BendersState* state_out = nullptr) {
  if (c.periods() == 0) throw Error("solve_benders: case has no periods");
  const int P = static_cast<int>(c.periods());

  LinearProgram master;
  Links links;
  InvestIndex inv = add_investment(master, c, links);
  if (reserve) add_reserve(master, c, links, inv);
  std::vector<int> theta;
  for (int p = 0; p < P; ++p) theta.push_back(master.add_col(1.0));
  const auto flat = detail::flatten(links);
  const int n_links = static_cast<int>(flat.size());

  std::vector<detail::PeriodSubproblem> subs;
  subs.reserve(P);
  for (int p = 0; p < P; ++p) subs.emplace_back(c, p, uc);

  lp::SimplexSolver master_solver(master);
  BendersState st;
  st.stab_weight = cfg.stab_weight;
  ExpansionSolution out;

  std::vector<double> incumbent;
  std::vector<Dispatch> best_dispatch(P);
  bool use_stab = false;
  std::vector<detail::PeriodSubproblem::Result> res(P);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    auto ms = master_solver.solve();
    if (ms.status != lp::Status::optimal) {
      out.status = ms.status;
      out.message = "master: " + std::string(lp::to_string(ms.status)) + " " +
                    ms.message;
      break;
    }
    st.lower = std::max(st.lower, ms.objective);

    std::vector<double> x = ms.x;
    if (use_stab && !incumbent.empty())
      for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = cfg.stab_weight * incumbent[j] + (1 - cfg.stab_weight) * x[j];
    std::vector<double> cap(n_links);
    for (int i = 0; i < n_links; ++i) cap[i] = std::max(0.0, flat[i]->value(x));

    auto work = [&](int w, int jobs) {
      for (int p = w; p < P; p += jobs) res[p] = subs[p].solve(cap);
    };
    int jobs = std::max(1, std::min(cfg.sub_jobs, P));
    if (jobs == 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < jobs; ++w) pool.emplace_back(work, w, jobs);
      for (auto& t : pool) t.join();
    }
    bool failed = false;
    for (int p = 0; p < P; ++p)
      if (res[p].sol.status != lp::Status::optimal) {
        out.status = lp::Status::failed;
        out.message = "subproblem " + std::to_string(p) + ": " +
                      res[p].sol.message;
        failed = true;
      }
    if (failed) break;

    double upper = detail::investment_cost(master, inv, x);
    for (int p = 0; p < P; ++p) upper += res[p].value;
    bool improved = upper < st.upper;
    if (improved) {
      st.upper = upper;
      incumbent = x;
      for (int p = 0; p < P; ++p) best_dispatch[p] = subs[p].dispatch(res[p].sol);
    }
    // Without progress at a stabilized point, take a pure step next.
    use_stab = cfg.stab_weight > 0 && (improved || !use_stab);

    for (int p = 0; p < P; ++p) {
      BendersCut cut{p, res[p].value, cap, res[p].slope};
      // theta_p - sum_i slope_i * link_i(x) >= value - sum_i slope_i * cap_i
      std::map<int, double> row{{theta[p], 1.0}};
      double rhs = cut.value;
      for (int i = 0; i < n_links; ++i) {
        double g = cut.slope[i];
        if (g == 0) continue;
        rhs -= g * (cap[i] - flat[i]->constant);
        for (auto [j, a] : flat[i]->terms) row[j] -= g * a;
      }
      std::vector<std::pair<int, double>> entries(row.begin(), row.end());
      master_solver.add_row(entries, Sense::ge, rhs);
      st.cuts.push_back(std::move(cut));
    }

    st.iterations = it;
    st.log.push_back({it, st.lower, st.upper, st.gap()});
    if (st.gap() <= cfg.gap_tol) {
      st.converged = true;
      break;
    }
  }

  if (!incumbent.empty()) {
    if (out.message.empty()) out.status = lp::Status::optimal;
    out.converged = st.converged;
    if (!st.converged && out.message.empty())
      out.message = "max_iter reached with gap " + csv::fmt(st.gap());
    detail::read_investment(c, inv, links, incumbent, out);
    for (int p = 0; p < P; ++p) out.dispatch.append(best_dispatch[p]);
    out.costs = operating_costs(c, out.dispatch);
    out.costs.fixed = detail::investment_cost(master, inv, incumbent);
    out.objective = st.upper;
  }
  if (state_out) *state_out = std::move(st);
  return out;
}

}  // namespace gridres
