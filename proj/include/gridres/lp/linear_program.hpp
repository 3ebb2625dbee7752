#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace gridres::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { le, eq, ge };

inline char sense_char(Sense s) {
  return s == Sense::le ? 'L' : (s == Sense::ge ? 'G' : 'E');
}

struct Triplet {
  int row;
  int col;
  double value;
};

// min obj'x + obj_constant  s.t.  A x (sense) rhs,  col_lo <= x <= col_hi.
struct LinearProgram {
  std::vector<double> obj;
  std::vector<double> col_lo;
  std::vector<double> col_hi;
  double obj_constant = 0;
  std::vector<Sense> sense;
  std::vector<double> rhs;
  std::vector<Triplet> coeffs;

  int num_cols() const { return static_cast<int>(obj.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }

  int add_col(double cost, double lo = 0, double hi = kInf) {
    obj.push_back(cost);
    col_lo.push_back(lo);
    col_hi.push_back(hi);
    return num_cols() - 1;
  }

  int add_row(Sense s, double b) {
    sense.push_back(s);
    rhs.push_back(b);
    return num_rows() - 1;
  }

  void add(int row, int col, double value) {
    if (value != 0) coeffs.push_back({row, col, value});
  }

  // Row activity bounds implied by the sense.
  double row_lo(int i) const {
    return sense[i] == Sense::le ? -kInf : rhs[i];
  }
  double row_hi(int i) const {
    return sense[i] == Sense::ge ? kInf : rhs[i];
  }

  std::vector<double> activity(const std::vector<double>& x) const {
    std::vector<double> a(num_rows(), 0.0);
    for (const auto& t : coeffs) a[t.row] += t.value * x[t.col];
    return a;
  }

  double objective(const std::vector<double>& x) const {
    double v = obj_constant;
    for (int j = 0; j < num_cols(); ++j) v += obj[j] * x[j];
    return v;
  }

  // Checks finiteness and bound ordering.
  bool well_formed() const {
    if (col_lo.size() != obj.size() || col_hi.size() != obj.size() ||
        sense.size() != rhs.size())
      return false;
    for (int j = 0; j < num_cols(); ++j)
      if (!std::isfinite(obj[j]) || col_lo[j] > col_hi[j] ||
          col_lo[j] == kInf || col_hi[j] == -kInf)
        return false;
    for (double b : rhs)
      if (!std::isfinite(b)) return false;
    for (const auto& t : coeffs)
      if (!std::isfinite(t.value) || t.row < 0 || t.row >= num_rows() ||
          t.col < 0 || t.col >= num_cols())
        return false;
    return std::isfinite(obj_constant);
  }
};

enum class Status { optimal, infeasible, unbounded, failed };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::failed: return "failed";
  }
  return "?";
}

struct Solution {
  Status status = Status::failed;
  std::vector<double> x;         // primal values per column
  std::vector<double> row_dual;  // y: d = c - A'y
  std::vector<double> reduced_cost;
  std::vector<double> activity;  // A x
  double objective = 0;
  long iterations = 0;
  std::string message;
};

}  // namespace gridres::lp
