#pragma once

// Phase-2 production-cost run of a fixed portfolio.

#include <string>

#include "gridres/core.hpp"
#include "gridres/dispatch.hpp"
#include "gridres/lp/simplex.hpp"
#include "gridres/model.hpp"

namespace gridres {

struct OperationsResult {
  lp::Status status = lp::Status::failed;
  std::string message;
  Capacities capacities;
  Dispatch dispatch;
  CostBreakdown costs;
  double objective = 0;
};

inline OperationsResult solve_operations(const SystemCase& c,
                                         const Capacities& cap, UcMode uc,
                                         const lp::SimplexOptions& opts = {}) {
  auto m = build_operations_lp(c, cap, uc);
  auto sol = lp::solve_simplex(m.lp, opts);
  OperationsResult out;
  out.status = sol.status;
  out.message = sol.message;
  out.capacities = cap;
  if (sol.status != lp::Status::optimal) return out;
  out.dispatch = extract_dispatch(c, m.ops, sol);
  out.costs = operating_costs(c, out.dispatch);
  out.costs.fixed = fixed_cost(c, cap);
  out.objective = sol.objective;
  return out;
}

}  // namespace gridres
