// gridres: command-line front end for the resolution-study pipeline.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "gridres/pipeline.hpp"

using namespace gridres;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs, sub_jobs;
  std::string out;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig rc = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) {
    rc.seed = *g.seed;
    rc.synth.seed = *g.seed;
  }
  if (g.jobs) rc.jobs = *g.jobs;
  if (g.sub_jobs) rc.benders.sub_jobs = *g.sub_jobs;
  if (!g.out.empty()) rc.out_dir = g.out;
  check_run_config(rc);
  return rc;
}

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw ConfigError("--out is required");
  return g.out;
}

UcMode uc_from(const std::string& s) {
  auto m = parse_uc(s);
  if (!m) throw ConfigError("unknown uc mode '" + s + "'");
  return *m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resolution study for capacity expansion planning"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--seed", g.seed, "Seed for synthesis and clustering");
  app.add_option("--jobs", g.jobs, "Concurrent ladder combinations");
  app.add_option("--sub-jobs", g.sub_jobs, "Threads for Benders subproblems");
  app.add_option("--out", g.out, "Output directory or file");

  // gen
  auto* gen = app.add_subcommand("gen", "Write a synthetic case");
  std::optional<int> gen_regions, gen_periods;
  std::string gen_pathway;
  gen->add_option("--regions", gen_regions, "Fine regions");
  gen->add_option("--periods", gen_periods, "Periods in the year");
  gen->add_option("--pathway", gen_pathway, "BAU or CP");

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Spatially aggregate a case");
  std::string agg_case, agg_partition;
  int agg_regions = 0;
  agg->add_option("--case", agg_case, "Fine case directory")->required();
  agg->add_option("--partition", agg_partition, "partition.csv");
  agg->add_option("--regions", agg_regions, "Contiguous block partition size");

  // cluster
  auto* clu = app.add_subcommand("cluster", "Reduce a case to representative periods");
  std::string clu_case;
  int clu_k = 0;
  bool clu_extremes = false;
  clu->add_option("--case", clu_case, "Case directory")->required();
  clu->add_option("--k", clu_k, "Representative periods (0 keeps all)")->required();
  clu->add_flag("--force-extremes", clu_extremes, "Keep extreme periods");

  // expand
  auto* exp = app.add_subcommand("expand", "Solve capacity expansion");
  std::string exp_case, exp_uc = "relaxed";
  bool exp_no_reserve = false, exp_mono = false, exp_dump = false;
  exp->add_option("--case", exp_case, "Case directory")->required();
  exp->add_option("--uc", exp_uc, "none or relaxed");
  exp->add_flag("--no-reserve", exp_no_reserve, "Drop the reserve-margin rows");
  exp->add_flag("--monolithic", exp_mono, "Single LP instead of Benders");
  exp->add_flag("--dump-lp", exp_dump, "Write the monolithic LP as expansion.lp");

  // translate
  auto* tra = app.add_subcommand("translate", "Map a coarse plan onto the fine case");
  std::string tra_coarse, tra_fine, tra_partition, tra_exp;
  double tra_beta = 1.0;
  tra->add_option("--coarse", tra_coarse, "Coarse case directory")->required();
  tra->add_option("--fine", tra_fine, "Fine case directory")->required();
  tra->add_option("--partition", tra_partition, "partition.csv")->required();
  tra->add_option("--expansion", tra_exp, "expansion.json")->required();
  tra->add_option("--beta", tra_beta, "Backbone growth per MW of corridor expansion");

  // operate
  auto* ope = app.add_subcommand("operate", "Production-cost run of a portfolio");
  std::string ope_case, ope_portfolio, ope_exp, ope_alloc;
  bool ope_dump = false;
  ope->add_option("--case", ope_case, "Fine case directory")->required();
  ope->add_option("--portfolio", ope_portfolio, "portfolio.csv")->required();
  ope->add_option("--expansion", ope_exp, "expansion.json for phase comparison");
  ope->add_flag("--dump-lp", ope_dump, "Write the LP as operations.lp");

  // metrics
  auto* met = app.add_subcommand("metrics", "Score a run directory against the baseline");
  std::string met_run, met_hrb, met_fine, met_name;
  met->add_option("--run", met_run, "Run directory (allocation.csv, outcome.json)")
      ->required();
  met->add_option("--hrb", met_hrb, "Baseline run directory")->required();
  met->add_option("--fine", met_fine, "Fine case directory")->required();
  met->add_option("--name", met_name, "Case name in the report");

  // ladder
  auto* lad = app.add_subcommand("ladder", "Run every configured resolution combination");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      RunConfig rc = resolve_config(g);
      if (gen_regions) rc.synth.n_fine_regions = *gen_regions;
      if (gen_periods) rc.synth.periods = *gen_periods;
      if (!gen_pathway.empty()) {
        if (gen_pathway == "BAU") rc.synth.pathway = Pathway::bau;
        else if (gen_pathway == "CP") rc.synth.pathway = Pathway::cp;
        else throw ConfigError("unknown pathway '" + gen_pathway + "'");
      }
      rc.synth.check();
      write_case(generate(rc.synth), require_out(g));
      std::cout << "wrote case " << g.out << " (config " << config_digest(rc.synth)
                << ")\n";
    } else if (agg->parsed()) {
      SystemCase fine = load_system(agg_case);
      RegionPartition part;
      if (!agg_partition.empty()) part = load_partition(agg_partition);
      else if (agg_regions > 0) part = block_partition(fine, agg_regions);
      else part = identity_partition(fine);
      fs::path out = require_out(g);
      write_case(aggregate_spatial(fine, part), out);
      write_partition(part, out / "partition.csv");
    } else if (clu->parsed()) {
      RunConfig rc = resolve_config(g);
      SystemCase c = load_system(clu_case);
      auto red = clu_k == 0 ? full_reduction(c)
                            : cluster_timesteps(c, clu_k, clu_extremes, rc.seed);
      fs::path out = require_out(g);
      write_case(apply_temporal(c, red), out);
      write_reduction(red, out / "reduction.csv");
    } else if (exp->parsed()) {
      RunConfig rc = resolve_config(g);
      SystemCase c = load_system(exp_case);
      UcMode uc = uc_from(exp_uc);
      fs::path out = require_out(g);
      fs::create_directories(out);
      ExpansionRecord er;
      if (exp_mono) {
        if (exp_dump) {
          std::ofstream lpf(out / "expansion.lp");
          lp::write_lp(build_expansion_lp(c, uc, !exp_no_reserve).lp, lpf);
        }
        er.sol = solve_expansion_monolithic(c, uc, !exp_no_reserve);
      } else {
        BendersState st;
        er.sol = solve_benders(c, uc, !exp_no_reserve, rc.benders, &st);
        std::ofstream log(out / "benders.csv");
        write_benders_log(st, log);
        er.iterations = st.iterations;
        er.lower = st.lower;
        er.upper = st.upper;
        er.gap = st.gap();
      }
      if (er.sol.status != lp::Status::optimal)
        throw Error("expansion failed: " + er.sol.message);
      er.predicted_generation = generation_by_tech(c, er.sol.dispatch);
      er.predicted_variable = er.sol.costs.variable + er.sol.costs.carbon;
      write_expansion(er, out / "expansion.json");
      std::cout << "objective " << csv::fmt(er.sol.objective) << '\n';
    } else if (tra->parsed()) {
      SystemCase coarse = load_system(tra_coarse);
      SystemCase fine = load_system(tra_fine);
      auto part = load_partition(tra_partition);
      auto er = load_expansion(tra_exp);
      TranslateOptions opt;
      opt.backbone_beta = tra_beta;
      auto tr = translate(er.sol, coarse, fine, part, opt);
      fs::path out = require_out(g);
      write_case(tr.hr_case, out / "hr_case");
      write_allocation(tr.allocation, out / "allocation.csv");
      write_portfolio(tr.portfolio, out / "portfolio.csv");
    } else if (ope->parsed()) {
      SystemCase c = load_system(ope_case);
      auto cap = load_portfolio(ope_portfolio, c);
      fs::path out = require_out(g);
      fs::create_directories(out);
      if (ope_dump) {
        std::ofstream lpf(out / "operations.lp");
        lp::write_lp(build_operations_lp(c, cap, UcMode::relaxed).lp, lpf);
      }
      auto ops = solve_operations(c, cap, UcMode::relaxed);
      if (ops.status != lp::Status::optimal)
        throw Error("operations LP " + std::string(lp::to_string(ops.status)));
      ExpansionRecord er;
      if (!ope_exp.empty()) er = load_expansion(ope_exp);
      auto outcome = summarize_case(
          {}, c, ops,
          phase_compare(er.predicted_generation, er.predicted_variable, c, ops));
      write_outcome(outcome, out / "outcome.json");
      std::cout << "total cost " << csv::fmt(ops.costs.total()) << '\n';
    } else if (met->parsed()) {
      SystemCase fine = load_system(met_fine);
      auto load = [](const fs::path& dir) {
        CaseOutcome o = load_outcome(dir / "outcome.json");
        o.allocation = load_allocation(dir / "allocation.csv");
        return o;
      };
      auto run = load(met_run);
      auto hrb = load(met_hrb);
      std::string name = met_name.empty() ? fs::path(met_run).filename().string()
                                          : met_name;
      auto report = make_report(name, fine, run, hrb);
      fs::path out = g.out.empty() ? fs::path(met_run) / "report.csv" : fs::path(g.out);
      write_report({report}, out);
      print_summary({report}, std::cout);
    } else if (lad->parsed()) {
      RunConfig rc = resolve_config(g);
      auto lr = run_ladder(rc, &std::cerr);
      print_summary(lr.reports, std::cout);
      if (lr.failures > 0) {
        std::cerr << lr.failures << " combination(s) failed; see "
                  << (rc.out_dir / "failures.csv").string() << '\n';
        return 2;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
