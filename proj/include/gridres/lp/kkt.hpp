#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gridres/lp/linear_program.hpp"

namespace gridres::lp {

// Optimality certificate measured in the original (unscaled) units.
struct KktReport {
  double primal_residual = 0;   // worst row or bound violation
  double rhs_norm = 0;          // max |b| over rhs and finite bounds
  double dual_infeasibility = 0;
  double complementarity = 0;

  double primal_tolerance() const { return 1e-7 * (1.0 + rhs_norm); }

  bool primal_ok() const { return primal_residual <= primal_tolerance(); }
  bool dual_ok() const { return dual_infeasibility <= 1e-7; }
  bool complementarity_ok() const { return complementarity <= 1e-6; }
  bool ok() const { return primal_ok() && dual_ok() && complementarity_ok(); }
};

inline KktReport check_kkt(const LinearProgram& lp, const Solution& sol) {
  KktReport r;
  const int n = lp.num_cols();
  const int m = lp.num_rows();
  if (static_cast<int>(sol.x.size()) != n ||
      static_cast<int>(sol.row_dual.size()) != m)
    throw std::invalid_argument("check_kkt: solution does not match the program");
  auto act = lp.activity(sol.x);
  std::vector<double> d(lp.obj);
  for (const auto& t : lp.coeffs) d[t.col] -= t.value * sol.row_dual[t.row];

  for (int i = 0; i < m; ++i) r.rhs_norm = std::max(r.rhs_norm, std::abs(lp.rhs[i]));
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lp.col_lo[j]))
      r.rhs_norm = std::max(r.rhs_norm, std::abs(lp.col_lo[j]));
    if (std::isfinite(lp.col_hi[j]))
      r.rhs_norm = std::max(r.rhs_norm, std::abs(lp.col_hi[j]));
  }

  auto account = [&r](double value, double lo, double hi, double dual) {
    r.primal_residual = std::max({r.primal_residual, lo - value, value - hi});
    if (dual > 0) {
      if (lo == -kInf)
        r.dual_infeasibility = std::max(r.dual_infeasibility, dual);
      else
        r.complementarity = std::max(r.complementarity, dual * (value - lo));
    } else if (dual < 0) {
      if (hi == kInf)
        r.dual_infeasibility = std::max(r.dual_infeasibility, -dual);
      else
        r.complementarity = std::max(r.complementarity, -dual * (hi - value));
    }
  };

  for (int j = 0; j < n; ++j) account(sol.x[j], lp.col_lo[j], lp.col_hi[j], d[j]);
  // The logical of row i carries reduced cost y_i.
  for (int i = 0; i < m; ++i)
    account(act[i], lp.row_lo(i), lp.row_hi(i), sol.row_dual[i]);
  return r;
}

}  // namespace gridres::lp
