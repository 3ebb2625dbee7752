#pragma once

// Seeded generator of small dense LPs with boxed variables.

#include <cmath>
#include <cstdint>

#include "gridres/lp/linear_program.hpp"
#include "gridres/rng.hpp"

namespace gridres::testing {

inline lp::LinearProgram random_small_lp(std::uint64_t seed, int max_vars = 6,
                                         int max_rows = 8) {
  XorShift64Star rng(seed * 7919 + 17);
  const int n = 1 + static_cast<int>(rng.below(max_vars));
  const int m = 1 + static_cast<int>(rng.below(max_rows));
  auto half = [&](double lo, double hi) {
    return std::round(rng.uniform(lo, hi) * 2.0) / 2.0;
  };
  lp::LinearProgram lp;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    double lo = rng.uniform() < 0.7 ? 0.0 : -half(0, 4);
    double hi = lo + 1 + half(0, 9);
    lp.add_col(half(-5, 5), lo, hi);
    x0[j] = rng.uniform(lo, hi);
  }
  const bool guarantee_feasible = rng.uniform() < 0.85;
  for (int i = 0; i < m; ++i) {
    double act = 0;
    std::vector<double> row(n);
    for (int j = 0; j < n; ++j) {
      row[j] = rng.uniform() < 0.2 ? 0.0 : half(-5, 5);
      act += row[j] * x0[j];
    }
    auto pick = rng.below(5);
    lp::Sense s = pick < 2 ? lp::Sense::le : (pick < 4 ? lp::Sense::ge : lp::Sense::eq);
    double rhs;
    if (!guarantee_feasible) {
      rhs = half(-10, 10);
    } else if (s == lp::Sense::le) {
      rhs = act + rng.uniform(0, 3);
    } else if (s == lp::Sense::ge) {
      rhs = act - rng.uniform(0, 3);
    } else {
      rhs = act;
    }
    int r = lp.add_row(s, rhs);
    for (int j = 0; j < n; ++j) lp.add(r, j, row[j]);
  }
  return lp;
}

}  // namespace gridres::testing
