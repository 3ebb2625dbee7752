#include <gtest/gtest.h>

#include "gridres/expansion.hpp"
#include "gridres/resolution/spatial.hpp"
#include "gridres/rng.hpp"
#include "gridres/translate.hpp"
#include "support/audit.hpp"
#include "support/fixtures.hpp"

using namespace gridres;
using gridres::testing::region;
using gridres::testing::synthetic;

namespace {

Site site(const std::string& id, double lcoe, double cap,
          Tech tech = Tech::solar) {
  Site s;
  s.id = id;
  s.lcoe = lcoe;
  s.capacity_limit = s.spur_capacity = cap;
  s.tech = tech;
  return s;
}

ThermalUnit unit(const std::string& id, double heat_rate, double cap) {
  ThermalUnit u;
  u.id = id;
  u.heat_rate = heat_rate;
  u.capacity = cap;
  return u;
}

double total(const Allocation& a) {
  double s = 0;
  for (const auto& [k, v] : a) s += v;
  return s;
}

double total(const std::map<std::string, double>& a) {
  double s = 0;
  for (const auto& [k, v] : a) s += v;
  return s;
}

TransmissionLine line(const std::string& a, const std::string& b, double cap) {
  TransmissionLine l;
  l.id = a + "-" + b;
  l.from = l.fine_from = a;
  l.to = l.fine_to = b;
  l.capacity = cap;
  l.max_expansion = 1000;
  return l;
}

// Fine regions A,B | C,D with corridors A-C and B-D and an internal A-B.
SystemCase four_region(double pop_a = 2e6) {
  SystemCase c;
  c.period_length = 1;
  c.regions = {region("A", {10}, pop_a), region("B", {10}, 1e6),
               region("C", {10}, 3e6), region("D", {10}, 4e6)};
  c.lines = {line("A", "B", 0), line("A", "C", 0), line("B", "D", 0)};
  ResourceCluster k;
  k.id = "A_solar";
  k.region = "A";
  k.tech = Tech::solar;
  k.max_new_capacity = 10;
  c.clusters.push_back(k);
  Site s = site("A_s1", 30, 10);
  s.fine_region = "A";
  s.cluster = k.id;
  s.spur_sink = "B";
  s.profile = {0.5};
  c.sites.push_back(s);
  refresh_derived(c);
  reset_periods(c);
  return c;
}

RegionPartition halves(const SystemCase& c) {
  return make_partition({{"A", "X"}, {"B", "X"}, {"C", "Y"}, {"D", "Y"}});
}

}  // namespace

TEST(AllocateVre, FillsCheapestSitesFirst) {
  auto a = allocate_vre(5, {site("s2", 40, 3), site("s1", 30, 3)});
  EXPECT_EQ(a, (Allocation{{"s1", 3}, {"s2", 2}}));
  EXPECT_TRUE(allocate_vre(0, {site("s1", 30, 3)}).empty());
  auto tie = allocate_vre(1, {site("b", 30, 3), site("a", 30, 3)});
  EXPECT_EQ(tie, (Allocation{{"a", 1}}));
  EXPECT_THROW(allocate_vre(7, {site("s1", 30, 3), site("s2", 40, 3)}), Error);
}

TEST(AllocateVre, FixedOffshoreBeforeFloating) {
  auto a = allocate_vre(4, {site("f", 10, 3, Tech::offshore_floating),
                            site("x", 50, 3, Tech::offshore_fixed)});
  EXPECT_EQ(a, (Allocation{{"x", 3}, {"f", 1}}));
}

TEST(AllocateVre, OrderingSoundnessUnderFuzz) {
  XorShift64Star rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Site> sites;
    int n = 1 + static_cast<int>(rng.below(8));
    double cap = 0;
    for (int i = 0; i < n; ++i) {
      sites.push_back(site("s" + std::to_string(i), 1 + rng.below(5),
                           rng.uniform(0.5, 20)));
      cap += sites.back().capacity_limit;
    }
    double invest = rng.uniform(0, cap);
    auto a = allocate_vre(invest, sites);
    EXPECT_NEAR(total(a), invest, 1e-9);
    std::map<std::string, double> got(a.begin(), a.end());
    int partial = 0;
    for (const auto& s : sites) {
      double mw = got.count(s.id) ? got[s.id] : 0;
      EXPECT_LE(mw, s.capacity_limit + 1e-12);
      if (mw > 0 && mw < s.capacity_limit - 1e-9) ++partial;
      // No cheaper site may stay unfilled while this one receives MW.
      if (mw > 0)
        for (const auto& t : sites)
          if (t.lcoe < s.lcoe)
            EXPECT_NEAR(got.count(t.id) ? got[t.id] : 0, t.capacity_limit, 1e-9);
    }
    EXPECT_LE(partial, 1);
  }
}

TEST(AllocateThermal, SplitsByDemand) {
  auto a = allocate_thermal(9, {{"FRCC", 2}, {"SRSE", 1}});
  EXPECT_EQ(a.at("FRCC"), 6.0);
  EXPECT_EQ(a.at("SRSE"), 3.0);
  EXPECT_EQ(allocate_thermal(7, {{"X", 5}}).at("X"), 7.0);
  auto thirds = allocate_thermal(10, {{"a", 1}, {"b", 1}, {"c", 1}});
  EXPECT_NEAR(thirds.at("a"), 10.0 / 3, 1e-12);
  EXPECT_NEAR(thirds.at("b"), 10.0 / 3, 1e-12);
  EXPECT_NEAR(thirds.at("c"), 10.0 / 3, 1e-12);
  EXPECT_EQ(thirds.at("a") + thirds.at("b") + thirds.at("c"), 10.0);
  EXPECT_THROW(allocate_thermal(1, {{"a", 0}, {"b", 0}}), Error);
}

TEST(AllocateStorage, SplitsByVreThenDemand) {
  auto a = allocate_storage(8, 32, {{"a", 10}, {"b", 30}});
  EXPECT_DOUBLE_EQ(a.at("a").first, 2);
  EXPECT_DOUBLE_EQ(a.at("b").first, 6);
  EXPECT_DOUBLE_EQ(a.at("a").second, 8);
  EXPECT_DOUBLE_EQ(a.at("b").second, 24);
  auto fallback = allocate_storage(8, 0, {{"a", 0}, {"b", 0}}, {{"a", 1}, {"b", 3}});
  EXPECT_DOUBLE_EQ(fallback.at("a").first, 2);
  EXPECT_DOUBLE_EQ(fallback.at("b").first, 6);
  auto uniform = allocate_storage(8, 0, {{"a", 0}, {"b", 0}});
  EXPECT_DOUBLE_EQ(uniform.at("a").first, 4);
  EXPECT_EQ(allocate_storage(5, 9, {{"only", 0}}).at("only"),
            (std::pair<double, double>{5, 9}));
}

TEST(RetireUnits, HighestHeatRateFirst) {
  auto r = retire_units(100, {unit("u1", 7, 80), unit("u2", 9, 50)});
  EXPECT_EQ(r, (Allocation{{"u2", 50}, {"u1", 50}}));
  EXPECT_TRUE(retire_units(0, {unit("u1", 7, 80)}).empty());
  auto all = retire_units(130, {unit("u1", 7, 80), unit("u2", 9, 50)});
  EXPECT_EQ(all, (Allocation{{"u2", 50}, {"u1", 80}}));
  EXPECT_THROW(retire_units(131, {unit("u1", 7, 80), unit("u2", 9, 50)}), Error);
}

TEST(RetireUnits, ConservesAndRespectsOrderUnderFuzz) {
  XorShift64Star rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ThermalUnit> units;
    double cap = 0;
    int n = 1 + static_cast<int>(rng.below(6));
    for (int i = 0; i < n; ++i) {
      units.push_back(unit("u" + std::to_string(i), rng.uniform(6, 12),
                           rng.uniform(10, 200)));
      cap += units.back().capacity;
    }
    double mw = rng.uniform(0, cap);
    auto r = retire_units(mw, units);
    EXPECT_NEAR(total(r), mw, 1e-9);
    std::map<std::string, double> got(r.begin(), r.end());
    for (const auto& u : units) {
      double v = got.count(u.id) ? got[u.id] : 0;
      EXPECT_GE(v, 0);
      EXPECT_LE(v, u.capacity + 1e-12);
      if (v > 0)
        for (const auto& w : units)
          if (w.heat_rate > u.heat_rate)
            EXPECT_NEAR(got.count(w.id) ? got[w.id] : 0, w.capacity, 1e-9);
    }
  }
}

TEST(Redistrict, CorridorSplitsByEndpointPopulation) {
  SystemCase fine = four_region();
  auto part = halves(fine);
  SystemCase coarse = aggregate_spatial(fine, part);
  ExpansionSolution sol;
  for (const auto& l : coarse.lines)
    if (l.kind == LineKind::interregional) sol.capacities.line[l.id] = 10;
  auto out = redistrict_transmission(sol, coarse, fine, {}, part, 0.0);
  EXPECT_DOUBLE_EQ(out.at("A-C"), 5);  // 2M + 3M
  EXPECT_DOUBLE_EQ(out.at("B-D"), 5);  // 1M + 4M
  EXPECT_DOUBLE_EQ(out.at("A-B"), 0);
}

TEST(Redistrict, SpurCrossingAddsToTheFineLine) {
  // B is the urban sink of {A, B}, so the A site's spur crosses A-B.
  SystemCase fine = four_region(0.5e6);
  auto part = halves(fine);
  SystemCase coarse = aggregate_spatial(fine, part);
  SiteAllocation alloc;
  alloc.site_mw["A_s1"] = 2;
  ExpansionSolution sol;
  auto out = redistrict_transmission(sol, coarse, fine, alloc, part);
  EXPECT_DOUBLE_EQ(out.at("A-B"), 2);
  EXPECT_DOUBLE_EQ(out.at("A-C"), 0);
}

TEST(Redistrict, MissingFineLineIsAHardError) {
  SystemCase fine = four_region();
  auto part = halves(fine);
  SystemCase coarse = aggregate_spatial(fine, part);
  fine.lines.erase(fine.lines.begin() + 1);  // drop A-C
  ExpansionSolution sol;
  try {
    redistrict_transmission(sol, coarse, fine, {}, part);
    FAIL() << "expected a topology error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("A-C"), std::string::npos) << e.what();
  }
}

TEST(Redistrict, IdentityPartitionKeepsCoarseCapacities) {
  SystemCase fine = synthetic(3, 4, 1);
  auto part = identity_partition(fine);
  SystemCase coarse = aggregate_spatial(fine, part);
  ExpansionSolution sol;
  XorShift64Star rng(3);
  for (const auto& l : coarse.lines)
    if (l.kind == LineKind::interregional)
      sol.capacities.line[l.id] = l.capacity + rng.uniform(0, 100);
  auto out = redistrict_transmission(sol, coarse, fine, {}, part);
  for (const auto& [id, mw] : sol.capacities.line) EXPECT_EQ(out.at(id), mw);
}

TEST(Portfolio, EmptyAllocationIsTheExistingFleet) {
  SystemCase fine = synthetic(2, 3, 1);
  auto p = build_portfolio(fine, {});
  auto e = existing_capacities(fine);
  EXPECT_EQ(p.cluster, e.cluster);
  EXPECT_EQ(p.power, e.power);
  EXPECT_EQ(p.energy, e.energy);
  EXPECT_EQ(p.line, e.line);
}

TEST(Portfolio, NegativeCapacityIsRejected) {
  SystemCase fine = synthetic(2, 3, 1);
  SiteAllocation a;
  const auto& u = fine.units.front();
  a.unit_retired[u.id] = u.capacity + 1e6;
  EXPECT_THROW(build_portfolio(fine, a), Error);
}

// Random coarse plans on seeded systems: every technology's MW survives the
// trip down to sites, units, clusters and lines.
TEST(Translate, ConservationAuditOverFuzzedPlans) {
  XorShift64Star rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    auto r = gridres::testing::audit_fuzzed_plan(rng, trial);
    EXPECT_TRUE(r.bounds_ok) << "trial " << trial;
    EXPECT_LE(r.allocation_error, 1e-9) << "trial " << trial << " " << r.worst;
    EXPECT_LE(r.line_error, 1e-9) << "trial " << trial;
    EXPECT_LE(r.portfolio_error, 1e-6) << "trial " << trial;
  }
}

TEST(Translate, OwnSolutionComesBackUnchanged) {
  SystemCase fine = synthetic(4, 3, 2);
  auto part = identity_partition(fine);
  SystemCase same = aggregate_spatial(fine, part);
  auto sol = solve_expansion_monolithic(same, UcMode::relaxed, true);
  ASSERT_EQ(sol.status, lp::Status::optimal);
  auto tr = translate(sol, same, fine, part);
  for (const auto& [id, mw] : sol.capacities.cluster)
    EXPECT_NEAR(tr.portfolio.cluster.at(id), mw, 1e-9 * (1 + mw)) << id;
  for (const auto& [id, mw] : sol.capacities.power)
    EXPECT_NEAR(tr.portfolio.power.at(id), mw, 1e-9 * (1 + mw)) << id;
  for (const auto& [id, mw] : sol.capacities.energy)
    EXPECT_NEAR(tr.portfolio.energy.at(id), mw, 1e-9 * (1 + mw)) << id;
  for (const auto& [id, mw] : sol.capacities.line)
    EXPECT_EQ(tr.portfolio.line.at(id), mw) << id;
  EXPECT_EQ(tr.hr_case, fine);
}
