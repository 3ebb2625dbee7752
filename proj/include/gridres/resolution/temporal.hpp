#pragma once

// Representative-period selection: extreme-period scan, seeded k-means with
// medoid representatives, and application of a reduction to a case.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gridres/core.hpp"
#include "gridres/csv.hpp"
#include "gridres/io.hpp"
#include "gridres/rng.hpp"

namespace gridres {

struct TemporalReduction {
  std::vector<int> representatives;  // source period indices
  std::vector<double> weights;
  std::vector<bool> extreme;
  int period_length = 0;

  std::size_t size() const { return representatives.size(); }
  double total_weight() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
  }
};

struct ExtremePeriods {
  std::optional<int> min_solar;
  std::optional<int> min_wind;
  std::optional<int> max_load;
  std::vector<std::string> warnings;

  // Distinct extremes in the order solar, wind, load.
  std::vector<int> distinct() const {
    std::vector<int> out;
    for (const auto& p : {min_solar, min_wind, max_load})
      if (p && std::find(out.begin(), out.end(), *p) == out.end())
        out.push_back(*p);
    return out;
  }
};

namespace detail {

inline void require_full_year(const SystemCase& c, const char* what) {
  for (std::size_t p = 0; p < c.periods(); ++p)
    if (c.period_weights[p] != 1.0)
      throw Error(std::string(what) + ": case is already temporally reduced");
}

// Capacity-weighted mean CF per period over sites matching `pick`.
template <typename Pred>
std::optional<std::vector<double>> period_cf(const SystemCase& c, Pred pick) {
  const std::size_t P = c.periods(), L = c.period_length;
  std::vector<double> num(P, 0.0);
  double cap = 0;
  for (const auto& s : c.sites) {
    if (!pick(s.tech)) continue;
    cap += s.capacity_limit;
    for (std::size_t p = 0; p < P; ++p) {
      double sum = 0;
      for (std::size_t h = 0; h < L; ++h) sum += s.profile[p * L + h];
      num[p] += s.capacity_limit * sum;
    }
  }
  if (cap <= 0) return std::nullopt;
  for (double& v : num) v /= cap * static_cast<double>(L);
  return num;
}

}  // namespace detail

inline ExtremePeriods select_extreme_periods(const SystemCase& c) {
  detail::require_full_year(c, "select_extreme_periods");
  ExtremePeriods ex;
  auto argmin = [](const std::vector<double>& v) {
    return static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
  };
  if (auto s = detail::period_cf(c, [](Tech t) { return t == Tech::solar; }))
    ex.min_solar = argmin(*s);
  else
    ex.warnings.push_back("no solar sites: minimum-solar period omitted");
  if (auto w = detail::period_cf(c, [](Tech t) { return is_wind(t); }))
    ex.min_wind = argmin(*w);
  else
    ex.warnings.push_back("no wind sites: minimum-wind period omitted");

  const std::size_t P = c.periods(), L = c.period_length;
  std::vector<double> load(P, 0.0);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t h = 0; h < L; ++h)
      for (const auto& r : c.regions) load[p] += r.demand[p * L + h];
  if (P > 0)
    ex.max_load =
        static_cast<int>(std::max_element(load.begin(), load.end()) -
                         load.begin());
  return ex;
}

// One feature row per period: per-region demand scaled by its yearly max,
// then every VRE cluster profile, hour by hour.
inline std::vector<std::vector<double>> period_features(const SystemCase& c) {
  const std::size_t P = c.periods(), L = c.period_length;
  std::vector<std::vector<double>> f(P);
  for (const auto& r : c.regions) {
    double peak = 0;
    for (double d : r.demand) peak = std::max(peak, d);
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t h = 0; h < L; ++h)
        f[p].push_back(peak > 0 ? r.demand[p * L + h] / peak : 0.0);
  }
  for (const auto& k : c.clusters) {
    if (!is_vre(k.tech)) continue;
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t h = 0; h < L; ++h) f[p].push_back(k.profile[p * L + h]);
  }
  return f;
}

inline double squared_distance(const std::vector<double>& a,
                               const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignment;
  int iterations = 0;
};

// Lloyd's algorithm from a seeded farthest-point start: the first center is
// a seeded uniform pick, each further center is the point farthest from the
// chosen ones. Ties go to the lowest index throughout.
inline KMeansResult kmeans(const std::vector<std::vector<double>>& x, int k,
                           std::uint64_t seed, int max_iter = 300,
                           double tol = 1e-9) {
  const int n = static_cast<int>(x.size());
  KMeansResult res;
  XorShift64Star rng(seed);
  std::vector<int> chosen{static_cast<int>(rng.below(n))};
  std::vector<double> near(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(chosen.size()) < k) {
    for (int i = 0; i < n; ++i)
      near[i] = std::min(near[i], squared_distance(x[i], x[chosen.back()]));
    int far = 0;
    for (int i = 1; i < n; ++i)
      if (near[i] > near[far]) far = i;
    chosen.push_back(far);
  }
  for (int c : chosen) res.centroids.push_back(x[c]);

  auto assign = [&] {
    res.assignment.assign(n, 0);
    for (int i = 0; i < n; ++i) {
      double best = squared_distance(x[i], res.centroids[0]);
      for (int c = 1; c < k; ++c) {
        double d = squared_distance(x[i], res.centroids[c]);
        if (d < best) {
          best = d;
          res.assignment[i] = c;
        }
      }
    }
  };
  for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
    assign();
    double moved = 0;
    for (int c = 0; c < k; ++c) {
      std::vector<double> sum(x[0].size(), 0.0);
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (res.assignment[i] == c) {
          for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += x[i][j];
          ++count;
        }
      if (count == 0) continue;
      for (double& v : sum) v /= count;
      moved = std::max(moved, std::sqrt(squared_distance(sum, res.centroids[c])));
      res.centroids[c] = std::move(sum);
    }
    if (moved < tol) break;
  }
  res.iterations = std::min(res.iterations, max_iter);
  assign();
  return res;
}

inline TemporalReduction cluster_timesteps(const SystemCase& c, int k,
                                           bool force_extremes,
                                           std::uint64_t seed) {
  detail::require_full_year(c, "cluster_timesteps");
  const int P = static_cast<int>(c.periods());
  if (k < 1 || k > P)
    throw Error("cluster_timesteps: k = " + std::to_string(k) +
                " outside [1, " + std::to_string(P) + "]");
  TemporalReduction red;
  red.period_length = c.period_length;

  std::vector<int> extremes;
  if (force_extremes) {
    if (k < 4) throw Error("cluster_timesteps: forcing extremes needs k >= 4");
    extremes = select_extreme_periods(c).distinct();
  }
  if (k == P) {
    for (int p = 0; p < P; ++p) {
      red.representatives.push_back(p);
      red.weights.push_back(1);
      red.extreme.push_back(std::find(extremes.begin(), extremes.end(), p) !=
                            extremes.end());
    }
    return red;
  }

  auto x = period_features(c);
  const int base = force_extremes ? k - static_cast<int>(extremes.size()) : k;
  auto km = kmeans(x, base, seed);

  std::vector<int> group(P);
  std::vector<bool> is_extreme(P, false);
  if (force_extremes)
    for (int e : extremes) is_extreme[e] = true;
  for (int i = 0; i < P; ++i) {
    if (is_extreme[i]) {
      group[i] = -1;
      continue;
    }
    group[i] = km.assignment[i];
    if (force_extremes) {
      // Reassign the remaining periods to their nearest centroid.
      double best = squared_distance(x[i], km.centroids[0]);
      group[i] = 0;
      for (int g = 1; g < base; ++g) {
        double d = squared_distance(x[i], km.centroids[g]);
        if (d < best) {
          best = d;
          group[i] = g;
        }
      }
    }
  }

  std::vector<std::pair<int, int>> reps;  // (medoid, size)
  for (int g = 0; g < base; ++g) {
    int medoid = -1, size = 0;
    double best = 0;
    for (int i = 0; i < P; ++i) {
      if (group[i] != g) continue;
      ++size;
      double d = squared_distance(x[i], km.centroids[g]);
      if (medoid < 0 || d < best) {
        medoid = i;
        best = d;
      }
    }
    if (size > 0) reps.push_back({medoid, size});
  }
  std::sort(reps.begin(), reps.end());
  for (auto [m, size] : reps) {
    red.representatives.push_back(m);
    red.weights.push_back(size);
    red.extreme.push_back(false);
  }
  if (force_extremes)
    for (int e : extremes) {
      red.representatives.push_back(e);
      red.weights.push_back(1);
      red.extreme.push_back(true);
    }
  return red;
}

// Every period its own representative.
inline TemporalReduction full_reduction(const SystemCase& c) {
  TemporalReduction red;
  red.period_length = c.period_length;
  for (std::size_t p = 0; p < c.periods(); ++p) {
    red.representatives.push_back(static_cast<int>(p));
    red.weights.push_back(c.period_weights[p]);
    red.extreme.push_back(c.period_extreme[p]);
  }
  return red;
}

inline SystemCase apply_temporal(const SystemCase& c,
                                 const TemporalReduction& red) {
  if (red.period_length != c.period_length)
    throw Error("apply_temporal: period length mismatch");
  const std::size_t L = c.period_length;
  for (int p : red.representatives)
    if (p < 0 || static_cast<std::size_t>(p) >= c.periods())
      throw Error("apply_temporal: representative index " + std::to_string(p) +
                  " out of range");
  auto subset = [&](const std::vector<double>& v) {
    std::vector<double> out;
    out.reserve(red.size() * L);
    for (int p : red.representatives)
      out.insert(out.end(), v.begin() + p * L, v.begin() + (p + 1) * L);
    return out;
  };
  SystemCase out = c;
  for (auto& r : out.regions) r.demand = subset(r.demand);
  for (auto& s : out.sites) s.profile = subset(s.profile);
  out.period_weights = red.weights;
  out.period_extreme = red.extreme;
  out.period_source.clear();
  out.extremes_included = false;
  for (std::size_t i = 0; i < red.size(); ++i) {
    out.period_source.push_back(c.period_source[red.representatives[i]]);
    if (red.extreme[i]) out.extremes_included = true;
  }
  refresh_derived(out);
  return out;
}

inline void write_reduction(const TemporalReduction& red,
                            const fs::path& path) {
  csv::Writer w(path, {"representative", "weight", "is_extreme"});
  for (std::size_t i = 0; i < red.size(); ++i)
    w(red.representatives[i], red.weights[i],
      static_cast<bool>(red.extreme[i]));
  w.close();
}

inline TemporalReduction load_reduction(const fs::path& path,
                                        int period_length) {
  TemporalReduction red;
  red.period_length = period_length;
  for (const auto& row :
       csv::read(path, {"representative", "weight", "is_extreme"})) {
    red.representatives.push_back(
        static_cast<int>(row.integer("representative")));
    red.weights.push_back(row.num("weight"));
    red.extreme.push_back(row.integer("is_extreme") != 0);
  }
  return red;
}

}  // namespace gridres
