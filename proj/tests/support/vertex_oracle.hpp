#pragma once

// Test-only LP oracle: enumerate every basic solution of a small bounded LP
// by brute force. Independent of the simplex code path.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "gridres/lp/linear_program.hpp"

namespace gridres::testing {

struct OracleResult {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> x;
};

namespace detail {

// Solves M z = v by Gaussian elimination with partial pivoting.
inline std::optional<std::vector<double>> solve_dense(
    std::vector<std::vector<double>> M, std::vector<double> v) {
  const std::size_t n = v.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
    if (std::abs(M[piv][c]) < 1e-11) return std::nullopt;
    std::swap(M[piv], M[c]);
    std::swap(v[piv], v[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      double f = M[r][c] / M[c][c];
      if (f == 0) continue;
      for (std::size_t k = c; k < n; ++k) M[r][k] -= f * M[c][k];
      v[r] -= f * v[c];
    }
  }
  for (std::size_t c = 0; c < n; ++c) v[c] /= M[c][c];
  return v;
}

}  // namespace detail

// Requires every variable to have finite bounds so the feasible set is a
// polytope and the optimum (if any) sits at a vertex.
inline OracleResult vertex_enumeration(const lp::LinearProgram& lp) {
  const int n = lp.num_cols();
  std::vector<std::vector<double>> A(lp.num_rows(), std::vector<double>(n, 0));
  for (const auto& t : lp.coeffs) A[t.row][t.col] += t.value;

  // Hyperplanes g'x = h that may be active at a vertex.
  std::vector<std::vector<double>> G;
  std::vector<double> H;
  for (int i = 0; i < lp.num_rows(); ++i) {
    G.push_back(A[i]);
    H.push_back(lp.rhs[i]);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1;
    G.push_back(e);
    H.push_back(lp.col_lo[j]);
    G.push_back(e);
    H.push_back(lp.col_hi[j]);
  }

  auto feasible = [&](const std::vector<double>& x) {
    const double tol = 1e-9;
    for (int j = 0; j < n; ++j)
      if (x[j] < lp.col_lo[j] - tol || x[j] > lp.col_hi[j] + tol) return false;
    for (int i = 0; i < lp.num_rows(); ++i) {
      double a = 0;
      for (int j = 0; j < n; ++j) a += A[i][j] * x[j];
      double scale = tol * (1 + std::abs(lp.rhs[i]));
      if (lp.sense[i] != lp::Sense::ge && a > lp.rhs[i] + scale) return false;
      if (lp.sense[i] != lp::Sense::le && a < lp.rhs[i] - scale) return false;
    }
    return true;
  };

  OracleResult best;
  const int k = static_cast<int>(G.size());
  // Iterate over all n-subsets of the hyperplanes.
  std::vector<bool> mask(k, false);
  std::fill(mask.begin(), mask.begin() + std::min(n, k), true);
  if (n > k) return best;
  do {
    std::vector<std::vector<double>> M;
    std::vector<double> v;
    for (int i = 0; i < k; ++i)
      if (mask[i]) {
        M.push_back(G[i]);
        v.push_back(H[i]);
      }
    auto x = detail::solve_dense(M, v);
    if (!x || !feasible(*x)) continue;
    double obj = lp.objective(*x);
    if (!best.feasible || obj < best.objective) {
      best.feasible = true;
      best.objective = obj;
      best.x = *x;
    }
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

}  // namespace gridres::testing
