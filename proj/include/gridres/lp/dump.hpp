#pragma once

// Plain-text sparse LP format for cross-checking with other solvers:
//
//   lp <cols> <rows> <nonzeros>
//   obj <constant> <c_0> ... <c_{n-1}>
//   col <j> <lo> <hi>          one per column, bounds may be inf/-inf
//   row <i> <L|E|G> <rhs>      one per row
//   <i> <j> <a_ij>             triplets

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gridres/csv.hpp"
#include "gridres/lp/linear_program.hpp"

namespace gridres::lp {

inline void write_lp(const LinearProgram& lp, std::ostream& out) {
  out << "lp " << lp.num_cols() << ' ' << lp.num_rows() << ' '
      << lp.coeffs.size() << "\nobj " << csv::fmt(lp.obj_constant);
  for (double c : lp.obj) out << ' ' << csv::fmt(c);
  out << '\n';
  for (int j = 0; j < lp.num_cols(); ++j)
    out << "col " << j << ' ' << csv::fmt(lp.col_lo[j]) << ' '
        << csv::fmt(lp.col_hi[j]) << '\n';
  for (int i = 0; i < lp.num_rows(); ++i)
    out << "row " << i << ' ' << sense_char(lp.sense[i]) << ' '
        << csv::fmt(lp.rhs[i]) << '\n';
  for (const auto& t : lp.coeffs)
    out << t.row << ' ' << t.col << ' ' << csv::fmt(t.value) << '\n';
}

inline LinearProgram read_lp(std::istream& in) {
  auto fail = [](const std::string& why) {
    throw std::runtime_error("read_lp: " + why);
  };
  auto num = [&](const std::string& s) {
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) fail("bad number '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad number '" + s + "'");
    }
    return 0.0;
  };
  std::string tag, a, b, c;
  long n = 0, m = 0, nnz = 0;
  if (!(in >> tag >> n >> m >> nnz) || tag != "lp" || n < 0 || m < 0 || nnz < 0)
    fail("missing header");
  LinearProgram lp;
  if (!(in >> tag >> a) || tag != "obj") fail("missing objective");
  lp.obj_constant = num(a);
  for (long j = 0; j < n; ++j) {
    if (!(in >> a)) fail("short objective");
    lp.add_col(num(a));
  }
  for (long j = 0; j < n; ++j) {
    long idx;
    if (!(in >> tag >> idx >> a >> b) || tag != "col" || idx != j)
      fail("bad column record " + std::to_string(j));
    lp.col_lo[j] = num(a);
    lp.col_hi[j] = num(b);
  }
  for (long i = 0; i < m; ++i) {
    long idx;
    if (!(in >> tag >> idx >> a >> b) || tag != "row" || idx != i || a.size() != 1)
      fail("bad row record " + std::to_string(i));
    Sense s = a == "L" ? Sense::le : a == "G" ? Sense::ge : Sense::eq;
    if (a != "L" && a != "G" && a != "E") fail("bad sense '" + a + "'");
    lp.add_row(s, num(b));
  }
  for (long k = 0; k < nnz; ++k) {
    long r, col;
    if (!(in >> r >> col >> c)) fail("short coefficient list");
    if (r < 0 || r >= m || col < 0 || col >= n) fail("coefficient out of range");
    lp.coeffs.push_back({static_cast<int>(r), static_cast<int>(col), num(c)});
  }
  return lp;
}

}  // namespace gridres::lp
