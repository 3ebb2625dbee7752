#pragma once

// Bounded primal revised simplex.
//
// Every row i gets a logical variable w_i = a_i'x carrying the row bounds, so
// the working system is [A  -I] [x; w] = 0 with bounds on every variable.
// Phase 1 minimizes the sum of bound violations of the basic variables and
// phase 2 the true objective; both use Dantzig pricing with a switch to
// Bland's rule after a run of degenerate pivots. The basis inverse is a
// sparse LU (Eigen) followed by a product-form eta file, refactored
// periodically. Rows and columns are scaled by powers of two.
//
// The solver object keeps its basis between solve() calls, so bound changes
// and appended rows are re-optimized from the previous basis.

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "gridres/lp/linear_program.hpp"

namespace gridres::lp {

struct SimplexOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  int refactor_every = 64;
  int bland_after = 1000;  // consecutive degenerate pivots
  long max_iterations = 0;  // 0: derived from problem size
  bool scale = true;
  double perturb = 1e-7;  // relative bound widening while iterating; 0 disables
};

class SimplexSolver {
 public:
  explicit SimplexSolver(LinearProgram lp, SimplexOptions opts = {})
      : lp_(std::move(lp)), opts_(opts) {
    n_ = lp_.num_cols();
    m_ = lp_.num_rows();
    cols_.assign(n_, {});
    for (const auto& t : lp_.coeffs) cols_[t.col].push_back({t.row, t.value});
    for (auto& col : cols_) merge_duplicates(col);
    compute_scaling();
    lo_.resize(n_ + m_);
    hi_.resize(n_ + m_);
    cost_.assign(n_ + m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp_.col_lo[j] / col_scale_[j];
      hi_[j] = lp_.col_hi[j] / col_scale_[j];
      cost_[j] = lp_.obj[j] * col_scale_[j] * cost_scale_;
    }
    for (int i = 0; i < m_; ++i) set_row_bounds_scaled(i);
    slack_basis();
  }

  const LinearProgram& lp() const { return lp_; }

  void set_col_bounds(int j, double lo, double hi) {
    lp_.col_lo[j] = lo;
    lp_.col_hi[j] = hi;
    lo_[j] = lo / col_scale_[j];
    hi_[j] = hi / col_scale_[j];
    if (state_[j] != State::basic) place_nonbasic(j);
  }

  void set_row_rhs(int i, double rhs) {
    lp_.rhs[i] = rhs;
    set_row_bounds_scaled(i);
    if (state_[n_ + i] != State::basic) place_nonbasic(n_ + i);
  }

  void set_objective(int j, double c) {
    lp_.obj[j] = c;
    cost_[j] = c * col_scale_[j] * cost_scale_;
  }

  // Appends a row; its logical enters the basis so the previous basis stays
  // a valid starting point.
  int add_row(const std::vector<std::pair<int, double>>& entries, Sense s,
              double rhs) {
    int i = lp_.add_row(s, rhs);
    double big = 0;
    for (auto [j, v] : entries) {
      lp_.add(i, j, v);
      big = std::max(big, std::abs(v * col_scale_[j]));
    }
    double rs = (opts_.scale && big > 0) ? pow2(1.0 / big) : 1.0;
    row_scale_.push_back(rs);
    for (auto [j, v] : entries)
      if (v != 0) cols_[j].push_back({i, v * rs * col_scale_[j]});
    ++m_;
    // Logical column index n_ + i; shift nothing since logicals are appended.
    lo_.push_back(0);
    hi_.push_back(0);
    cost_.push_back(0);
    set_row_bounds_scaled(i);
    x_.push_back(0);
    state_.push_back(State::basic);
    head_.push_back(n_ + i);
    needs_refactor_ = true;
    return i;
  }

  Solution solve() {
    Solution sol;
    if (!lp_.well_formed()) {
      sol.status = Status::failed;
      sol.message = "malformed linear program";
      return sol;
    }
    long limit = opts_.max_iterations > 0
                     ? opts_.max_iterations
                     : 20L * (n_ + m_) + 20000;
    long iter = 0;
    int degenerate = 0;
    int breakdowns = 0;
    bool bland = false;
    Status outcome = Status::failed;

    if (!refactor()) {
      slack_basis();
      if (!refactor()) return failure(sol, iter, "singular slack basis");
    }
    perturb();
    save_checkpoint();
    compute_basic_values();
    careful_ = 0;
    banned_.assign(n_ + m_, 0);
    int last_enter = -1;

    // Refactorizes; a singular basis rolls back to the last good one and
    // refactorizes after every pivot for a while, banning entering columns
    // whose pivot proved singular.
    auto reinvert = [&]() -> bool {
      if (refactor()) {
        save_checkpoint();
        if (careful_ > 0 && --careful_ == 0) banned_.assign(n_ + m_, 0);
        compute_basic_values();
        return true;
      }
      if (++breakdowns > 50) return false;
      if (careful_ > 0 && last_enter >= 0) banned_[last_enter] = 1;
      restore_checkpoint();
      if (!refactor()) {
        slack_basis();
        if (!refactor()) return false;
        save_checkpoint();
      }
      careful_ = opts_.refactor_every;
      compute_basic_values();
      return true;
    };

    std::vector<double> cb(m_), y, d(n_ + m_, 0.0);
    weight_.assign(n_ + m_, 1.0);
    std::vector<double> alpha;

    while (true) {
      if (iter >= limit) return failure(sol, iter, "iteration limit");
      if (static_cast<int>(etas_.size()) >= (careful_ > 0 ? 1 : opts_.refactor_every))
        if (!reinvert()) return failure(sol, iter, "repeated singular basis");

      bool phase1 = false;
      for (int p = 0; p < m_; ++p) {
        int v = head_[p];
        double x = x_[v];
        if (x < lo_[v] - opts_.primal_tol) {
          cb[p] = -1;
          phase1 = true;
        } else if (x > hi_[v] + opts_.primal_tol) {
          cb[p] = 1;
          phase1 = true;
        } else {
          cb[p] = 0;
        }
      }
      if (!phase1)
        for (int p = 0; p < m_; ++p) cb[p] = cost_[head_[p]];

      if (phase1 || !duals_fresh_) {
        y = btran(cb);
        for (int j = 0; j < n_ + m_; ++j)
          if (state_[j] != State::basic && state_[j] != State::fixed)
            d[j] = (phase1 ? 0.0 : cost_[j]) - column_dot(j, y);
        duals_fresh_ = !phase1;
      }

      // Pricing.
      int enter = -1;
      double best = 0;
      for (int j = 0; j < n_ + m_; ++j) {
        State st = state_[j];
        if (st == State::basic || st == State::fixed || banned_[j]) continue;
        double dj = d[j];
        double score = 0;
        if (st == State::at_lower) {
          if (dj < -opts_.dual_tol) score = -dj;
        } else if (st == State::at_upper) {
          if (dj > opts_.dual_tol) score = dj;
        } else if (std::abs(dj) > opts_.dual_tol) {
          score = std::abs(dj);
        }
        if (score <= 0) continue;
        score = score * score / weight_[j];
        if (bland) {
          enter = j;
          break;
        }
        if (score > best) {
          best = score;
          enter = j;
        }
      }

      if (enter < 0) {
        // Confirm on a fresh factorization before concluding.
        if (!etas_.empty()) {
          if (!reinvert()) return failure(sol, iter, "repeated singular basis");
          continue;
        }
        if (perturbed_ && !phase1) {
          // Back to the true bounds; a few cleanup pivots may follow.
          unperturb();
          compute_basic_values();
          continue;
        }
        outcome = phase1 ? Status::infeasible : Status::optimal;
        break;
      }

      double dir = d[enter] < 0 ? 1.0 : -1.0;
      alpha = ftran_column(enter);

      // Ratio test (Harris two-pass unless in Bland mode).
      int leave = -1;
      double leave_target = 0;
      double theta = kInf;
      double flip = hi_[enter] - lo_[enter];
      double ptol = opts_.primal_tol;

      auto target_of = [&](int p, double delta, double& target) {
        int v = head_[p];
        double x = x_[v];
        if (delta > 0) {
          if (x < lo_[v] - ptol) { target = lo_[v]; return true; }
          if (x > hi_[v] + ptol || hi_[v] == kInf) return false;
          target = hi_[v];
        } else {
          if (x > hi_[v] + ptol) { target = hi_[v]; return true; }
          if (x < lo_[v] - ptol || lo_[v] == -kInf) return false;
          target = lo_[v];
        }
        return true;
      };

      if (!bland) {
        double relaxed = kInf;
        for (int p = 0; p < m_; ++p) {
          double a = alpha[p];
          if (std::abs(a) <= opts_.pivot_tol) continue;
          double delta = -dir * a;
          double target;
          if (!target_of(p, delta, target)) continue;
          double slack = (delta > 0 ? target + ptol : target - ptol) - x_[head_[p]];
          relaxed = std::min(relaxed, std::max(0.0, slack / delta));
        }
        double bound = relaxed;
        if (flip <= bound) {
          theta = flip;
        } else if (relaxed < kInf) {
          double best_pivot = 0;
          for (int p = 0; p < m_; ++p) {
            double a = alpha[p];
            if (std::abs(a) <= opts_.pivot_tol) continue;
            double delta = -dir * a;
            double target;
            if (!target_of(p, delta, target)) continue;
            double ratio = std::max(0.0, (target - x_[head_[p]]) / delta);
            if (ratio <= relaxed && std::abs(a) > best_pivot) {
              best_pivot = std::abs(a);
              leave = p;
              leave_target = target;
              theta = ratio;
            }
          }
        }
      } else {
        double min_ratio = kInf;
        for (int p = 0; p < m_; ++p) {
          double a = alpha[p];
          if (std::abs(a) <= opts_.pivot_tol) continue;
          double delta = -dir * a;
          double target;
          if (!target_of(p, delta, target)) continue;
          double ratio = std::max(0.0, (target - x_[head_[p]]) / delta);
          if (ratio < min_ratio ||
              (ratio == min_ratio && leave >= 0 && head_[p] < head_[leave])) {
            min_ratio = ratio;
            leave = p;
            leave_target = target;
          }
        }
        theta = min_ratio;
        if (flip <= theta) {
          theta = flip;
          leave = -1;
        }
      }

      if (theta == kInf) {
        if (phase1) return failure(sol, iter, "unbounded phase 1 ray");
        outcome = Status::unbounded;
        break;
      }

      ++iter;
      if (theta <= 1e-12) {
        if (++degenerate > opts_.bland_after) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }

      for (int p = 0; p < m_; ++p)
        if (alpha[p] != 0) x_[head_[p]] -= theta * dir * alpha[p];
      x_[enter] += dir * theta;

      if (leave < 0) {
        // Bound flip of the entering variable.
        if (dir > 0) {
          x_[enter] = hi_[enter];
          state_[enter] = State::at_upper;
        } else {
          x_[enter] = lo_[enter];
          state_[enter] = State::at_lower;
        }
        continue;
      }

      int out = head_[leave];
      update_devex(enter, out, leave, alpha[leave], duals_fresh_ ? &d : nullptr);
      x_[out] = leave_target;
      if (lo_[out] == hi_[out])
        state_[out] = State::fixed;
      else
        state_[out] = leave_target == lo_[out] ? State::at_lower : State::at_upper;
      head_[leave] = enter;
      state_[enter] = State::basic;
      last_enter = enter;

      Eta eta;
      eta.pos = leave;
      eta.pivot = alpha[leave];
      for (int p = 0; p < m_; ++p)
        if (p != leave && alpha[p] != 0) eta.entries.push_back({p, alpha[p]});
      etas_.push_back(std::move(eta));
    }

    if (perturbed_) unperturb();
    sol.iterations = iter;
    sol.status = outcome;
    if (outcome == Status::optimal) fill_solution(sol);
    return sol;
  }

 private:
  enum class State { basic, at_lower, at_upper, free_zero, fixed };

  struct Entry {
    int row;
    double value;
  };

  struct Eta {
    int pos = 0;
    double pivot = 1;
    std::vector<std::pair<int, double>> entries;
  };

  using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  using LU = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

  static double pow2(double v) {
    if (!(v > 0) || !std::isfinite(v)) return 1.0;
    return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(v))));
  }

  static void merge_duplicates(std::vector<Entry>& col) {
    std::sort(col.begin(), col.end(),
              [](const Entry& a, const Entry& b) { return a.row < b.row; });
    std::vector<Entry> out;
    for (const auto& e : col) {
      if (!out.empty() && out.back().row == e.row)
        out.back().value += e.value;
      else
        out.push_back(e);
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Entry& e) { return e.value == 0; }),
              out.end());
    col = std::move(out);
  }

  void compute_scaling() {
    row_scale_.assign(m_, 1.0);
    col_scale_.assign(n_, 1.0);
    if (opts_.scale) {
      for (int pass = 0; pass < 6; ++pass) {
        std::vector<double> rmin(m_, kInf), rmax(m_, 0.0);
        for (int j = 0; j < n_; ++j)
          for (const auto& e : cols_[j]) {
            double a = std::abs(e.value) * col_scale_[j];
            rmin[e.row] = std::min(rmin[e.row], a);
            rmax[e.row] = std::max(rmax[e.row], a);
          }
        for (int i = 0; i < m_; ++i)
          if (rmax[i] > 0) row_scale_[i] = 1.0 / std::sqrt(rmin[i] * rmax[i]);
        for (int j = 0; j < n_; ++j) {
          double cmin = kInf, cmax = 0;
          for (const auto& e : cols_[j]) {
            double a = std::abs(e.value) * row_scale_[e.row];
            cmin = std::min(cmin, a);
            cmax = std::max(cmax, a);
          }
          if (cmax > 0) col_scale_[j] = 1.0 / std::sqrt(cmin * cmax);
        }
      }
      // Equilibrate rows so the largest entry is near one.
      std::vector<double> rmax(m_, 0.0);
      for (int j = 0; j < n_; ++j)
        for (const auto& e : cols_[j])
          rmax[e.row] = std::max(rmax[e.row],
                                 std::abs(e.value) * col_scale_[j] * row_scale_[e.row]);
      for (int i = 0; i < m_; ++i)
        if (rmax[i] > 0) row_scale_[i] /= rmax[i];
      for (auto& s : row_scale_) s = pow2(s);
      for (auto& s : col_scale_) s = pow2(s);
      double cmax = 0;
      for (int j = 0; j < n_; ++j)
        cmax = std::max(cmax, std::abs(lp_.obj[j]) * col_scale_[j]);
      cost_scale_ = cmax > 0 ? pow2(1.0 / cmax) : 1.0;
    }
    for (int j = 0; j < n_; ++j)
      for (auto& e : cols_[j]) e.value *= row_scale_[e.row] * col_scale_[j];
  }

  void set_row_bounds_scaled(int i) {
    lo_[n_ + i] = lp_.row_lo(i) * row_scale_[i];
    hi_[n_ + i] = lp_.row_hi(i) * row_scale_[i];
  }

  void place_nonbasic(int j) {
    if (lo_[j] == hi_[j]) {
      state_[j] = State::fixed;
      x_[j] = lo_[j];
    } else if (state_[j] == State::at_upper && hi_[j] < kInf) {
      x_[j] = hi_[j];
    } else if (lo_[j] > -kInf) {
      state_[j] = State::at_lower;
      x_[j] = lo_[j];
    } else if (hi_[j] < kInf) {
      state_[j] = State::at_upper;
      x_[j] = hi_[j];
    } else {
      state_[j] = State::free_zero;
      x_[j] = 0;
    }
  }

  void slack_basis() {
    x_.assign(n_ + m_, 0.0);
    state_.assign(n_ + m_, State::at_lower);
    head_.resize(m_);
    for (int j = 0; j < n_; ++j) place_nonbasic(j);
    for (int i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      state_[n_ + i] = State::basic;
    }
    needs_refactor_ = true;
  }

  // Devex reference weights from the pivot row of the leaving variable.
  // Reduced costs, when given, are updated along the same pivot row.
  void update_devex(int enter, int out, int leave, double pivot,
                    std::vector<double>* d) {
    std::vector<double> e(m_, 0.0);
    e[leave] = 1.0;
    auto rho = btran(std::move(e));
    double wq = weight_[enter];
    double td = d ? (*d)[enter] / pivot : 0.0;
    double top = 0;
    for (int j = 0; j < n_ + m_; ++j) {
      if (j == enter || state_[j] == State::basic || state_[j] == State::fixed)
        continue;
      double a = column_dot(j, rho);
      if (a == 0) continue;
      if (d) (*d)[j] -= td * a;
      double r = a / pivot;
      weight_[j] = std::max(weight_[j], r * r * wq);
      top = std::max(top, weight_[j]);
    }
    weight_[out] = std::max(wq / (pivot * pivot), 1.0);
    if (d) {
      (*d)[out] = -td;
      (*d)[enter] = 0;
    }
    if (std::max(top, weight_[out]) > 1e8) weight_.assign(n_ + m_, 1.0);
  }

  // Widens finite bounds by small deterministic amounts so degenerate
  // vertices split apart; this keeps the walk away from the badly
  // conditioned bases that ties among zero-valued variables allow.
  void perturb() {
    perturbed_ = false;
    if (!(opts_.perturb > 0)) return;
    true_lo_ = lo_;
    true_hi_ = hi_;
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (int j = 0; j < n_ + m_; ++j) {
      h ^= h >> 12;
      h ^= h << 25;
      h ^= h >> 27;
      double u = static_cast<double>((h * 0x2545F4914F6CDD1DULL) >> 11) * 0x1.0p-53;
      if (lo_[j] == hi_[j]) continue;
      double e = opts_.perturb * (1 + u);
      if (lo_[j] > -kInf) lo_[j] -= e * (1 + std::abs(lo_[j]));
      if (hi_[j] < kInf) hi_[j] += e * (1 + std::abs(hi_[j]));
    }
    for (int j = 0; j < n_ + m_; ++j)
      if (state_[j] != State::basic) place_nonbasic(j);
    perturbed_ = true;
  }

  void unperturb() {
    lo_ = true_lo_;
    hi_ = true_hi_;
    for (int j = 0; j < n_ + m_; ++j)
      if (state_[j] != State::basic) place_nonbasic(j);
    perturbed_ = false;
  }

  void save_checkpoint() {
    ckpt_head_ = head_;
    ckpt_state_ = state_;
    ckpt_x_ = x_;
  }

  void restore_checkpoint() {
    head_ = ckpt_head_;
    state_ = ckpt_state_;
    x_ = ckpt_x_;
  }

  double column_dot(int j, const std::vector<double>& y) const {
    if (j >= n_) return -y[j - n_];
    double s = 0;
    for (const auto& e : cols_[j]) s += e.value * y[e.row];
    return s;
  }

  bool refactor() {
    etas_.clear();
    duals_fresh_ = false;
    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(static_cast<std::size_t>(m_) * 3);
    for (int p = 0; p < m_; ++p) {
      int v = head_[p];
      if (v >= n_) {
        trip.emplace_back(v - n_, p, -1.0);
      } else {
        for (const auto& e : cols_[v]) trip.emplace_back(e.row, p, e.value);
      }
    }
    SpMat b(m_, m_);
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    lu_ = std::make_unique<LU>();
    if (m_ == 0) {
      needs_refactor_ = false;
      return true;
    }
    lu_->analyzePattern(b);
    lu_->factorize(b);
    needs_refactor_ = false;
    return lu_->info() == Eigen::Success;
  }

  std::vector<double> ftran(std::vector<double> rhs) const {
    if (m_ == 0) return rhs;
    Eigen::Map<Eigen::VectorXd> r(rhs.data(), m_);
    Eigen::VectorXd z = lu_->solve(r);
    std::vector<double> out(z.data(), z.data() + m_);
    for (const auto& eta : etas_) {
      double zr = out[eta.pos] / eta.pivot;
      out[eta.pos] = zr;
      if (zr != 0)
        for (auto [i, a] : eta.entries) out[i] -= a * zr;
    }
    return out;
  }

  std::vector<double> btran(std::vector<double> c) const {
    if (m_ == 0) return c;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = c[it->pos];
      for (auto [i, a] : it->entries) s -= a * c[i];
      c[it->pos] = s / it->pivot;
    }
    Eigen::Map<Eigen::VectorXd> r(c.data(), m_);
    Eigen::VectorXd y = lu_->transpose().solve(r);
    return std::vector<double>(y.data(), y.data() + m_);
  }

  std::vector<double> ftran_column(int j) const {
    std::vector<double> a(m_, 0.0);
    if (j >= n_) {
      a[j - n_] = -1.0;
    } else {
      for (const auto& e : cols_[j]) a[e.row] = e.value;
    }
    return ftran(std::move(a));
  }

  void compute_basic_values() {
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == State::basic || x_[j] == 0) continue;
      if (j >= n_) {
        rhs[j - n_] += x_[j];
      } else {
        for (const auto& e : cols_[j]) rhs[e.row] -= e.value * x_[j];
      }
    }
    auto xb = ftran(std::move(rhs));
    for (int p = 0; p < m_; ++p) x_[head_[p]] = xb[p];
  }

  Solution& failure(Solution& sol, long iter, const char* why) {
    if (perturbed_) unperturb();
    sol.status = Status::failed;
    sol.iterations = iter;
    sol.message = why;
    return sol;
  }

  void fill_solution(Solution& sol) {
    std::vector<double> cb(m_);
    for (int p = 0; p < m_; ++p) cb[p] = cost_[head_[p]];
    auto ys = btran(cb);
    sol.x.resize(n_);
    for (int j = 0; j < n_; ++j) {
      double v = x_[j] * col_scale_[j];
      // Snap nonbasic values onto their exact bounds.
      if (state_[j] == State::at_lower || state_[j] == State::fixed)
        v = lp_.col_lo[j];
      else if (state_[j] == State::at_upper)
        v = lp_.col_hi[j];
      sol.x[j] = v;
    }
    sol.row_dual.resize(m_);
    for (int i = 0; i < m_; ++i)
      sol.row_dual[i] = ys[i] * row_scale_[i] / cost_scale_;
    sol.activity = lp_.activity(sol.x);
    sol.reduced_cost.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) sol.reduced_cost[j] = lp_.obj[j];
    for (const auto& t : lp_.coeffs)
      sol.reduced_cost[t.col] -= t.value * sol.row_dual[t.row];
    sol.objective = lp_.objective(sol.x);
  }

  LinearProgram lp_;
  SimplexOptions opts_;
  int n_ = 0;
  int m_ = 0;
  std::vector<std::vector<Entry>> cols_;
  std::vector<double> row_scale_, col_scale_;
  double cost_scale_ = 1.0;
  std::vector<double> lo_, hi_, cost_, x_, weight_;
  std::vector<State> state_;
  std::vector<int> head_;
  std::unique_ptr<LU> lu_;
  std::vector<Eta> etas_;
  bool needs_refactor_ = true;
  bool duals_fresh_ = false;
  std::vector<int> ckpt_head_;
  std::vector<State> ckpt_state_;
  std::vector<double> ckpt_x_;
  bool perturbed_ = false;
  std::vector<double> true_lo_, true_hi_;
  int careful_ = 0;  // pivots left with refactorization after each one
  std::vector<char> banned_;
};

inline Solution solve_simplex(const LinearProgram& lp,
                              SimplexOptions opts = {}) {
  SimplexSolver solver(lp, opts);
  return solver.solve();
}

}  // namespace gridres::lp
