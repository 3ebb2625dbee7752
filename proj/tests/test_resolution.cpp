#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <numeric>

#include "gridres/expansion.hpp"
#include "gridres/resolution/spatial.hpp"
#include "gridres/resolution/temporal.hpp"
#include "gridres/rng.hpp"
#include "gridres/validate.hpp"
#include "support/extremes_oracle.hpp"
#include "support/fixtures.hpp"

using namespace gridres;
using gridres::testing::scan_extremes;
using gridres::testing::synthetic;

namespace {

// Reference k-means written from the clustering rules alone: features are
// per-region demand over its yearly peak followed by VRE cluster profiles;
// seeded first center, farthest-point seeding, Lloyd iterations, medoid =
// member closest to its centroid, ties to the lowest index.
struct Reference {
  std::vector<int> reps;
  std::vector<double> weights;
};

Reference reference_kmeans(const SystemCase& c, int k, std::uint64_t seed) {
  const int P = static_cast<int>(c.periods()), L = c.period_length;
  std::vector<Eigen::VectorXd> cols;
  for (const auto& r : c.regions) {
    Eigen::Map<const Eigen::VectorXd> d(r.demand.data(), r.demand.size());
    cols.push_back(d / d.maxCoeff());
  }
  for (const auto& cl : c.clusters)
    if (is_vre(cl.tech))
      cols.push_back(Eigen::Map<const Eigen::VectorXd>(cl.profile.data(),
                                                       cl.profile.size()));
  Eigen::MatrixXd X(P, L * cols.size());
  for (int p = 0; p < P; ++p)
    for (std::size_t f = 0; f < cols.size(); ++f)
      X.row(p).segment(f * L, L) = cols[f].segment(p * L, L).transpose();

  XorShift64Star rng(seed);
  std::vector<int> centers{static_cast<int>(rng.below(P))};
  while (static_cast<int>(centers.size()) < k) {
    int far = -1;
    double far_d = -1;
    for (int p = 0; p < P; ++p) {
      double d = std::numeric_limits<double>::infinity();
      for (int q : centers) d = std::min(d, (X.row(p) - X.row(q)).squaredNorm());
      if (d > far_d) far = p, far_d = d;
    }
    centers.push_back(far);
  }
  Eigen::MatrixXd C(k, X.cols());
  for (int i = 0; i < k; ++i) C.row(i) = X.row(centers[i]);
  std::vector<int> label(P);
  auto nearest = [&](int p) {
    Eigen::Index best;
    (C.rowwise() - X.row(p)).rowwise().squaredNorm().minCoeff(&best);
    return static_cast<int>(best);
  };
  for (int it = 0; it < 300; ++it) {
    for (int p = 0; p < P; ++p) label[p] = nearest(p);
    Eigen::MatrixXd next = C;
    for (int g = 0; g < k; ++g) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(X.cols());
      int n = 0;
      for (int p = 0; p < P; ++p)
        if (label[p] == g) sum += X.row(p), ++n;
      if (n) next.row(g) = sum / n;
    }
    double moved = (next - C).rowwise().norm().maxCoeff();
    C = next;
    if (moved < 1e-9) break;
  }
  for (int p = 0; p < P; ++p) label[p] = nearest(p);
  std::vector<std::pair<int, int>> reps;
  for (int g = 0; g < k; ++g) {
    int medoid = -1, n = 0;
    double best = 0;
    for (int p = 0; p < P; ++p) {
      if (label[p] != g) continue;
      ++n;
      double d = (X.row(p) - C.row(g)).squaredNorm();
      if (medoid < 0 || d < best) medoid = p, best = d;
    }
    if (n) reps.push_back({medoid, n});
  }
  std::sort(reps.begin(), reps.end());
  Reference out;
  for (auto [m, n] : reps) {
    out.reps.push_back(m);
    out.weights.push_back(n);
  }
  return out;
}

double total_energy(const SystemCase& c) {
  double e = 0;
  const std::size_t L = c.period_length;
  for (const auto& r : c.regions)
    for (std::size_t h = 0; h < r.demand.size(); ++h)
      e += c.period_weights[h / L] * r.demand[h];
  return e;
}

struct Totals {
  double sites = 0, units = 0, existing = 0, power = 0, energy = 0, lines = 0;
};

Totals totals(const SystemCase& c) {
  Totals t;
  for (const auto& s : c.sites) t.sites += s.capacity_limit;
  for (const auto& u : c.units) t.units += u.capacity;
  for (const auto& k : c.clusters) t.existing += k.existing_capacity;
  for (const auto& s : c.storage) {
    t.power += s.existing_power;
    t.energy += s.existing_energy;
  }
  for (const auto& l : c.lines) t.lines += l.capacity;
  return t;
}

}  // namespace

TEST(Spatial, MergedDemandIsAdditiveEveryHour) {
  SystemCase fine = synthetic(5, 2, 3);
  SystemCase coarse = aggregate_spatial(fine, block_partition(fine, 1));
  ASSERT_EQ(coarse.regions.size(), 1u);
  for (std::size_t h = 0; h < fine.hours(); ++h)
    EXPECT_EQ(coarse.regions[0].demand[h],
              fine.regions[0].demand[h] + fine.regions[1].demand[h]);
}

TEST(Spatial, CapacityIsConservedAcrossPartitions) {
  for (std::uint64_t seed : {1, 2, 3}) {
    SystemCase fine = synthetic(seed, 6, 2);
    Totals f = totals(fine);
    for (int parts : {1, 2, 3, 6}) {
      SystemCase coarse = aggregate_spatial(fine, block_partition(fine, parts));
      EXPECT_TRUE(validate(coarse).empty());
      Totals c = totals(coarse);
      EXPECT_NEAR(c.sites, f.sites, 1e-9 * f.sites);
      EXPECT_NEAR(c.units, f.units, 1e-9 * f.units);
      EXPECT_NEAR(c.existing, f.existing, 1e-9 * f.existing);
      EXPECT_NEAR(c.power, f.power, 1e-9);
      EXPECT_NEAR(c.energy, f.energy, 1e-9);
      EXPECT_NEAR(c.lines, f.lines, 1e-9 * f.lines);
      for (std::size_t h = 0; h < fine.hours(); ++h) {
        double a = 0, b = 0;
        for (const auto& r : fine.regions) a += r.demand[h];
        for (const auto& r : coarse.regions) b += r.demand[h];
        EXPECT_NEAR(a, b, 1e-9 * a);
      }
    }
  }
}

TEST(Spatial, InternalLinesBecomeBackbone) {
  SystemCase fine = synthetic(4, 6, 2);
  SystemCase coarse = aggregate_spatial(fine, block_partition(fine, 2));
  int inter = 0, backbone = 0;
  double fine_inter = 0, coarse_sum = 0;
  for (const auto& l : fine.lines)
    if (l.kind != LineKind::spur) fine_inter += l.capacity;
  for (const auto& l : coarse.lines) {
    inter += l.kind == LineKind::interregional;
    backbone += l.kind == LineKind::backbone;
    if (l.kind != LineKind::spur) coarse_sum += l.capacity;
  }
  EXPECT_EQ(inter, 1);
  EXPECT_GE(backbone, 2);
  EXPECT_NEAR(coarse_sum, fine_inter, 1e-9 * fine_inter);
}

TEST(Spatial, IdentityPartitionKeepsTheOptimum) {
  SystemCase fine = synthetic(6, 2, 2);
  SystemCase same = aggregate_spatial(fine, identity_partition(fine));
  EXPECT_EQ(same.regions, fine.regions);
  auto a = solve_expansion_monolithic(fine, UcMode::relaxed, true);
  auto b = solve_expansion_monolithic(same, UcMode::relaxed, true);
  ASSERT_EQ(a.status, lp::Status::optimal);
  ASSERT_EQ(b.status, lp::Status::optimal);
  EXPECT_NEAR(a.objective, b.objective, 1e-6 * std::abs(a.objective));
}

TEST(Spatial, RejectsPartialPartition) {
  SystemCase fine = synthetic(1, 3, 1);
  auto p = identity_partition(fine);
  p.coarse_of.erase(fine.regions[1].id);
  EXPECT_THROW(aggregate_spatial(fine, p), Error);
}

TEST(Extremes, AllZeroSolarPeriodIsTheMinimum) {
  SystemCase c = synthetic(2, 2, 10);
  const int L = c.period_length;
  for (auto& s : c.sites)
    if (s.tech == Tech::solar)
      for (int h = 0; h < L; ++h) s.profile[7 * L + h] = 0;
  EXPECT_EQ(select_extreme_periods(c).min_solar, 7);
}

TEST(Extremes, ConstantDemandTiesToPeriodZero) {
  SystemCase c = synthetic(2, 2, 6);
  for (auto& r : c.regions) std::fill(r.demand.begin(), r.demand.end(), 100.0);
  EXPECT_EQ(select_extreme_periods(c).max_load, 0);
}

TEST(Extremes, MatchExhaustiveScan) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    SystemCase c = synthetic(seed, 3, 12);
    auto got = select_extreme_periods(c);
    auto want = scan_extremes(c);
    EXPECT_EQ(got.min_solar, want.min_solar) << seed;
    EXPECT_EQ(got.min_wind, want.min_wind) << seed;
    EXPECT_EQ(got.max_load, want.max_load) << seed;
  }
}

TEST(Extremes, MissingTechnologyWarns) {
  SystemCase c = gridres::testing::single_thermal({10, 10});
  auto e = select_extreme_periods(c);
  EXPECT_FALSE(e.min_solar);
  EXPECT_FALSE(e.min_wind);
  EXPECT_EQ(e.warnings.size(), 2u);
}

TEST(Temporal, KEqualsPeriodCountIsTrivial) {
  SystemCase c = synthetic(3, 2, 6);
  auto red = cluster_timesteps(c, 6, false, 0);
  EXPECT_EQ(red.representatives, (std::vector<int>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(red.weights, std::vector<double>(6, 1.0));
  EXPECT_EQ(apply_temporal(c, red), c);
}

TEST(Temporal, SingleClusterCarriesTheWholeYear) {
  SystemCase c = synthetic(3, 2, 7);
  auto red = cluster_timesteps(c, 1, false, 0);
  ASSERT_EQ(red.size(), 1u);
  EXPECT_EQ(red.weights[0], 7);
}

TEST(Temporal, MatchesReferenceKMeans) {
  SystemCase c = synthetic(11, 3, 8);
  auto red = cluster_timesteps(c, 3, false, 0);
  auto ref = reference_kmeans(c, 3, 0);
  EXPECT_EQ(red.representatives, ref.reps);
  EXPECT_EQ(red.weights, ref.weights);
  EXPECT_DOUBLE_EQ(red.total_weight(), 8);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SystemCase s = synthetic(seed, 2, 10);
    for (int k : {2, 4, 6}) {
      auto r = cluster_timesteps(s, k, false, seed);
      auto o = reference_kmeans(s, k, seed);
      EXPECT_EQ(r.representatives, o.reps) << seed << " k=" << k;
      EXPECT_EQ(r.weights, o.weights) << seed << " k=" << k;
    }
  }
}

TEST(Temporal, ForcedExtremesAreSingletons) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SystemCase c = synthetic(seed, 3, 8);
    auto red = cluster_timesteps(c, 4, true, seed);
    EXPECT_DOUBLE_EQ(red.total_weight(), 8);
    auto ex = scan_extremes(c).distinct();
    std::vector<int> flagged;
    for (std::size_t i = 0; i < red.size(); ++i)
      if (red.extreme[i]) {
        flagged.push_back(red.representatives[i]);
        EXPECT_EQ(red.weights[i], 1);
      }
    std::sort(ex.begin(), ex.end());
    std::sort(flagged.begin(), flagged.end());
    EXPECT_EQ(flagged, ex);
  }
  SystemCase c = synthetic(1, 2, 8);
  EXPECT_THROW(cluster_timesteps(c, 3, true, 1), Error);
  EXPECT_THROW(cluster_timesteps(c, 9, false, 1), Error);
}

TEST(Temporal, ReductionInvariants) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    SystemCase c = synthetic(seed, 1 + seed % 3, 9);
    for (int k = 1; k <= 9; ++k) {
      bool force = k >= 4 && seed % 2;
      auto red = cluster_timesteps(c, k, force, seed);
      EXPECT_DOUBLE_EQ(red.total_weight(), 9);
      EXPECT_LE(static_cast<int>(red.size()), k);
      std::set<int> distinct(red.representatives.begin(), red.representatives.end());
      EXPECT_EQ(distinct.size(), red.size());
      for (int p : red.representatives) {
        EXPECT_GE(p, 0);
        EXPECT_LT(p, 9);
      }
      auto again = cluster_timesteps(c, k, force, seed);
      EXPECT_EQ(again.representatives, red.representatives);
      EXPECT_EQ(again.weights, red.weights);
    }
  }
}

TEST(Temporal, ApplyKeepsWeightsAndLength) {
  SystemCase c = synthetic(2, 2, 8);
  TemporalReduction red;
  red.period_length = c.period_length;
  red.representatives = {1, 6};
  red.weights = {5, 3};
  red.extreme = {false, false};
  SystemCase r = apply_temporal(c, red);
  EXPECT_EQ(r.hours(), 2u * c.period_length);
  EXPECT_EQ(r.period_weights, (std::vector<double>{5, 3}));
  EXPECT_EQ(r.period_source, (std::vector<int>{1, 6}));
  EXPECT_TRUE(validate(r).empty());
  const std::size_t L = c.period_length;
  for (std::size_t h = 0; h < L; ++h)
    EXPECT_EQ(r.regions[0].demand[L + h], c.regions[0].demand[6 * L + h]);
}

TEST(Temporal, WeightedEnergyTracksTheYear) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    SystemCase c = synthetic(seed, 3, 16);
    double full = total_energy(c);
    for (int k : {4, 6, 8}) {
      SystemCase r = apply_temporal(c, cluster_timesteps(c, k, k % 4 == 0, seed));
      EXPECT_NEAR(total_energy(r), full, 0.2 * full) << seed << " k=" << k;
    }
  }
}
