#include <gtest/gtest.h>

#include <sstream>

#include "gridres/metrics.hpp"
#include "gridres/operations.hpp"
#include "gridres/rng.hpp"
#include "support/fixtures.hpp"
#include "support/tempdir.hpp"

using namespace gridres;
using gridres::testing::import_pair;
using gridres::testing::single_thermal;

namespace {

using MwMap = std::map<std::string, double>;

OperationsResult operate(const SystemCase& c) {
  auto ops = solve_operations(c, existing_capacities(c), UcMode::relaxed);
  EXPECT_EQ(ops.status, lp::Status::optimal);
  return ops;
}

}  // namespace

TEST(Sco, HandExamples) {
  EXPECT_DOUBLE_EQ(sco(MwMap{{"A", 2}, {"B", 1}}, MwMap{{"A", 2}, {"B", 1}}), 100);
  EXPECT_DOUBLE_EQ(sco(MwMap{{"A", 2}}, MwMap{{"B", 1}}), 0);
  EXPECT_DOUBLE_EQ(sco(MwMap{{"A", 2}, {"B", 1}}, MwMap{{"A", 2}, {"C", 1}}), 50);
  EXPECT_DOUBLE_EQ(sco(MwMap{}, MwMap{}), 100);
  // Self-overlap is exact, not merely within rounding.
  MwMap odd{{"a", 183}, {"b", 281.02932073241067}};
  EXPECT_EQ(sco(odd, odd), 100);
}

TEST(Sco, SymmetricBoundedAndMonotone) {
  XorShift64Star rng(99);
  auto draw = [&] {
    MwMap m;
    for (int i = 0; i < 6; ++i)
      if (rng.uniform() < 0.6) m["s" + std::to_string(i)] = rng.uniform(0.1, 5);
    return m;
  };
  for (int trial = 0; trial < 200; ++trial) {
    MwMap a = draw(), b = draw();
    double ab = sco(a, b);
    EXPECT_DOUBLE_EQ(ab, sco(b, a));
    EXPECT_GE(ab, 0);
    EXPECT_LE(ab, 100);
    if (!a.empty()) EXPECT_DOUBLE_EQ(sco(a, a), 100);
    // Adding the same capacity to both sides never lowers the overlap.
    MwMap a2 = a, b2 = b;
    std::string extra = "s" + std::to_string(rng.below(8));
    double add = rng.uniform(0.1, 3);
    a2[extra] += add;
    b2[extra] += add;
    EXPECT_GE(sco(a2, b2), ab - 1e-12);
  }
}

TEST(Sco, FiltersByTechnologyOverTheSiteUniverse) {
  SystemCase fine = gridres::testing::synthetic(1, 2, 1);
  SiteAllocation a, b;
  for (const auto& s : fine.sites) {
    a.site_mw[s.id] = 1;
    if (s.tech == Tech::solar) b.site_mw[s.id] = 1;
  }
  EXPECT_DOUBLE_EQ(sco(a, b, fine, Tech::solar), 100);
  EXPECT_DOUBLE_EQ(sco(a, b, fine, Tech::onshore_wind), 0);
  a.site_mw["nowhere"] = 1;
  EXPECT_THROW(sco(a, b, fine, Tech::solar), Error);
}

TEST(Mse, LineFormulaIsVerbatim) {
  MwMap hrb{{"l1", 1000}, {"l2", 2000}};
  EXPECT_DOUBLE_EQ(mse_lines(hrb, hrb), 0);
  EXPECT_DOUBLE_EQ(mse_lines({{"l1", 4000}, {"l2", 6000}}, hrb), 2.5);
  EXPECT_DOUBLE_EQ(mse_lines({{"l1", 1500}}, {{"l1", 1000}}), 0.5);
  EXPECT_NEAR(rmse({{"l1", 4000}, {"l2", 6000}}, hrb, 1e-3), 5 / std::sqrt(2.0), 1e-12);
  EXPECT_THROW(mse_lines({{"l1", 1}}, hrb), Error);
  EXPECT_THROW(mse_lines({{"l1", 1}, {"l3", 1}}, hrb), Error);
}

TEST(Mse, RegionalFormulaIsVerbatim) {
  MwMap hrb{{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}};
  EXPECT_DOUBLE_EQ(mse_regional(hrb, hrb), 0);
  EXPECT_DOUBLE_EQ(mse_regional({{"a", 2}, {"b", 3}, {"c", 4}, {"d", 5}}, hrb), 0.5);
  EXPECT_DOUBLE_EQ(mse_regional({{"r", 15}}, {{"r", 5}}), 10);
  EXPECT_THROW(mse_regional({{"a", 1}}, hrb), Error);
}

TEST(Financials, NothingGeneratedNothingEarned) {
  auto c = single_thermal({10, 20, 30});
  auto f = financials(c, operate(c));
  EXPECT_DOUBLE_EQ(f.profit.at("A"), 0);
  EXPECT_DOUBLE_EQ(f.emissions.at("A"), 0);
  EXPECT_NEAR(f.costs.nse, 60 * c.nse_cost, 1e-6);
  EXPECT_NEAR(f.nse.at("A"), 60, 1e-9);
}

TEST(Financials, MarginalPlantEarnsNothing) {
  auto c = import_pair(200, 40, 0);
  auto f = financials(c, operate(c));
  EXPECT_NEAR(f.profit.at("A"), 0, 1e-7);
  c.carbon_fee = 200;
  f = financials(c, operate(c));
  EXPECT_NEAR(f.profit.at("A"), 0, 1e-6);
}

TEST(Financials, AbatementFeeOnAThousandTonnes) {
  // 100 MW for 20 h at 0.5 t/MWh = 1000 t.
  auto c = import_pair(0, 100, 0, 20);
  c.carbon_fee = 200;
  auto ops = operate(c);
  auto f = financials(c, ops);
  EXPECT_NEAR(f.emissions.at("A"), 1000, 1e-9);
  EXPECT_NEAR(f.costs.carbon, 200000, 1e-6);
  EXPECT_NEAR(f.costs.total(), ops.objective, 1e-6 * ops.objective);
}

TEST(Financials, CostIdentityOnSeededCases) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto c = gridres::testing::synthetic(seed, 2, 1, Pathway::cp);
    auto ops = operate(c);
    auto f = financials(c, ops);
    EXPECT_NEAR(f.costs.total(),
                f.costs.fixed + f.costs.variable + f.costs.nse + f.costs.carbon, 0);
    EXPECT_NEAR(f.costs.total(), ops.objective, 1e-6 * ops.objective);
    for (const auto& [r, s] : ops.dispatch.price)
      for (double p : s) EXPECT_LE(p, c.nse_cost + 1e-7);
  }
}

TEST(Prices, HourOfDayMeans) {
  Dispatch d;
  Series p(48);
  for (int h = 0; h < 48; ++h) p[h] = h;
  d.price["A"] = p;
  auto m = hour_of_day_prices(d);
  EXPECT_DOUBLE_EQ(m.at("A")[0], 12);
  EXPECT_DOUBLE_EQ(m.at("A")[23], 35);
}

TEST(PhaseCompare, SelfComparisonHasNoDelta) {
  auto c = gridres::testing::synthetic(2, 2, 1);
  auto ops = operate(c);
  auto pc = phase_compare(generation_by_tech(c, ops.dispatch),
                          ops.costs.variable + ops.costs.carbon, c, ops);
  for (const auto& [t, d] : pc.generation) EXPECT_EQ(d.delta(), 0) << to_string(t);
  EXPECT_EQ(pc.variable_cost.delta(), 0);
}

TEST(PhaseCompare, MissingThermalHasZeroDelta) {
  auto c = gridres::testing::synthetic(2, 1, 1);
  std::erase_if(c.clusters, [](const ResourceCluster& k) { return is_thermal(k.tech); });
  c.units.clear();
  auto ops = operate(c);
  auto pc = phase_compare({}, 0, c, ops);
  EXPECT_EQ(pc.generation.at(Tech::natural_gas).delta(), 0);
  EXPECT_EQ(pc.generation.at(Tech::coal).delta(), 0);
}

TEST(Report, SelfReportIsPerfectAndWritesLongFormat) {
  auto c = gridres::testing::synthetic(3, 2, 1);
  auto ops = operate(c);
  SiteAllocation alloc;
  for (const auto& s : c.sites) alloc.site_mw[s.id] = 5;
  auto pc = phase_compare(generation_by_tech(c, ops.dispatch),
                          ops.costs.variable + ops.costs.carbon, c, ops);
  auto outcome = summarize_case(alloc, c, ops, pc);
  auto r = make_report("self", c, outcome, outcome);
  for (const auto& [t, v] : r.sco) EXPECT_EQ(v, 100);
  EXPECT_EQ(r.sco_wind, 100);
  EXPECT_EQ(r.mse_cap, 0);
  EXPECT_EQ(r.mse_profit, 0);
  EXPECT_EQ(r.mse_emiss, 0);

  gridres::testing::TempDir tmp("metrics");
  write_report({r}, tmp / "report.csv");
  std::string text = gridres::testing::slurp(tmp / "report.csv");
  EXPECT_EQ(text.rfind("case,metric,key,value\n", 0), 0u);
  EXPECT_NE(text.find("self,sco,solar,100"), std::string::npos);
  EXPECT_NE(text.find("self,cost,total,"), std::string::npos);
  std::ostringstream out;
  print_summary({r}, out);
  EXPECT_NE(out.str().find("self"), std::string::npos);
}
