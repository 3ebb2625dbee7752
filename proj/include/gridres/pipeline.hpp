#pragma once

// End-to-end resolution study: every combination of spatial partition,
// temporal reduction and commitment mode is planned at its own resolution,
// translated to the finest case, operated there, and scored against the
// high-resolution baseline.

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gridres/core.hpp"
#include "gridres/csv.hpp"
#include "gridres/expansion.hpp"
#include "gridres/io.hpp"
#include "gridres/lp/dump.hpp"
#include "gridres/metrics.hpp"
#include "gridres/operations.hpp"
#include "gridres/resolution/spatial.hpp"
#include "gridres/resolution/temporal.hpp"
#include "gridres/syngen.hpp"
#include "gridres/translate.hpp"
#include "gridres/validate.hpp"

namespace gridres {

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A failure inside one pipeline stage of one combination.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage " + stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunConfig {
  std::optional<fs::path> input_dir;
  SynthConfig synth;
  std::vector<int> region_counts;         // block partitions of the fine case
  std::vector<fs::path> partition_files;  // explicit partitions
  std::vector<int> k_list{0};             // 0 keeps every period
  bool force_extremes = false;
  std::vector<UcMode> uc_modes{UcMode::relaxed};
  std::uint64_t seed = 1;  // k-means seeding
  BendersConfig benders;
  double backbone_beta = 1.0;
  fs::path out_dir = "gridres_out";
  int jobs = 1;
  bool dump_lp = false;
};

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig rc;
  try {
    if (j.contains("input_dir")) rc.input_dir = j.at("input_dir").get<std::string>();
    if (j.contains("synth")) rc.synth = j.at("synth").get<SynthConfig>();
    if (j.contains("seed")) {
      rc.seed = j.at("seed").get<std::uint64_t>();
      if (!j.contains("synth") || !j.at("synth").contains("seed"))
        rc.synth.seed = rc.seed;
    }
    rc.region_counts = j.value("regions", std::vector<int>{});
    for (const auto& p : j.value("partition_files", std::vector<std::string>{}))
      rc.partition_files.push_back(p);
    rc.k_list = j.value("k", rc.k_list);
    rc.force_extremes = j.value("force_extremes", false);
    if (j.contains("uc")) {
      rc.uc_modes.clear();
      for (const auto& s : j.at("uc").get<std::vector<std::string>>()) {
        auto m = parse_uc(s);
        if (!m) throw ConfigError("unknown uc mode '" + s + "'");
        rc.uc_modes.push_back(*m);
      }
    }
    rc.benders.gap_tol = j.value("gap_tol", rc.benders.gap_tol);
    rc.benders.max_iter = j.value("max_iter", rc.benders.max_iter);
    rc.benders.stab_weight = j.value("stab_weight", rc.benders.stab_weight);
    rc.benders.sub_jobs = j.value("sub_jobs", rc.benders.sub_jobs);
    rc.backbone_beta = j.value("backbone_beta", rc.backbone_beta);
    if (j.contains("out")) rc.out_dir = j.at("out").get<std::string>();
    rc.jobs = j.value("jobs", rc.jobs);
    rc.dump_lp = j.value("dump_lp", false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  return rc;
}

inline RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    return parse_run_config(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

inline void check_run_config(const RunConfig& rc) {
  if (!rc.input_dir) rc.synth.check();
  for (int k : rc.k_list)
    if (k < 0) throw ConfigError("run config: k must be >= 0");
  for (int n : rc.region_counts)
    if (n < 1) throw ConfigError("run config: region counts must be >= 1");
  if (rc.uc_modes.empty()) throw ConfigError("run config: no uc modes");
  if (rc.jobs < 1 || rc.benders.sub_jobs < 1)
    throw ConfigError("run config: jobs and sub_jobs must be >= 1");
  if (!(rc.benders.gap_tol > 0) || rc.benders.max_iter < 1)
    throw ConfigError("run config: gap_tol must be > 0 and max_iter >= 1");
  if (rc.benders.stab_weight < 0 || rc.benders.stab_weight >= 1)
    throw ConfigError("run config: stab_weight must be in [0, 1)");
  if (rc.backbone_beta < 0) throw ConfigError("run config: backbone_beta < 0");
}

struct Combo {
  std::string name;
  std::optional<fs::path> partition_file;
  int n_regions = 0;  // block partition size when no file is given
  int k = 0;          // 0 keeps every period
  UcMode uc = UcMode::relaxed;
  bool hrb = false;
  bool same_as_hrb = false;  // reported from the baseline run
};

inline SystemCase load_fine_case(const RunConfig& rc) {
  SystemCase c = rc.input_dir ? load_system(*rc.input_dir) : generate(rc.synth);
  auto violations = validate(c);
  if (!violations.empty())
    throw InputError("invariant violation: " + describe(violations.front()));
  return c;
}

// The baseline (finest space, every period, relaxed commitment) comes first.
inline std::vector<Combo> make_combos(const RunConfig& rc, const SystemCase& fine) {
  const int n_fine = static_cast<int>(fine.regions.size());
  std::vector<Combo> out;
  Combo hrb;
  hrb.name = "hrb";
  hrb.n_regions = n_fine;
  hrb.hrb = true;
  out.push_back(hrb);

  auto uc_name = [](UcMode m) { return std::string(to_string(m)); };
  auto k_name = [](int k) { return k == 0 ? std::string("full") : std::to_string(k); };
  std::set<std::tuple<int, int, UcMode>> seen;
  for (int n : rc.region_counts) {
    if (n > n_fine)
      throw ConfigError("run config: " + std::to_string(n) +
                        " regions exceeds the fine case's " + std::to_string(n_fine));
    for (int k : rc.k_list)
      for (auto uc : rc.uc_modes) {
        int kk = k >= static_cast<int>(fine.periods()) ? 0 : k;
        if (!seen.insert({n, kk, uc}).second) continue;
        Combo c;
        c.n_regions = n;
        c.k = kk;
        c.uc = uc;
        c.name = "r" + std::to_string(n) + "_k" + k_name(kk) + "_" + uc_name(uc);
        c.same_as_hrb = n == n_fine && kk == 0 && uc == UcMode::relaxed;
        out.push_back(c);
      }
  }
  for (const auto& f : rc.partition_files)
    for (int k : rc.k_list)
      for (auto uc : rc.uc_modes) {
        Combo c;
        c.partition_file = f;
        c.k = k >= static_cast<int>(fine.periods()) ? 0 : k;
        c.uc = uc;
        c.name = f.stem().string() + "_k" + k_name(c.k) + "_" + uc_name(uc);
        out.push_back(c);
      }
  return out;
}

// Phase-1 solution with what the metrics need from it.
struct ExpansionRecord {
  ExpansionSolution sol;
  std::map<Tech, double> predicted_generation;
  double predicted_variable = 0;
  int iterations = 0;
  double lower = 0, upper = 0, gap = 0;
};

namespace detail {

inline nlohmann::json tech_map(const std::map<Tech, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [t, v] : m) j[std::string(to_string(t))] = v;
  return j;
}

inline std::map<Tech, double> tech_map(const nlohmann::json& j) {
  std::map<Tech, double> m;
  for (const auto& [k, v] : j.items()) {
    auto t = parse_tech(k);
    if (!t) throw Error("unknown technology '" + k + "'");
    m[*t] = v.get<double>();
  }
  return m;
}

inline nlohmann::json costs_json(const CostBreakdown& c) {
  return {{"fixed", c.fixed}, {"variable", c.variable}, {"nse", c.nse},
          {"abatement_fee", c.carbon}, {"total", c.total()}};
}

inline CostBreakdown costs_json(const nlohmann::json& j) {
  CostBreakdown c;
  c.fixed = j.at("fixed").get<double>();
  c.variable = j.at("variable").get<double>();
  c.nse = j.at("nse").get<double>();
  c.carbon = j.at("abatement_fee").get<double>();
  return c;
}

inline nlohmann::json capacities_json(const Capacities& c) {
  return {{"cluster", c.cluster}, {"power", c.power}, {"energy", c.energy},
          {"line", c.line}};
}

inline Capacities capacities_json(const nlohmann::json& j) {
  Capacities c;
  j.at("cluster").get_to(c.cluster);
  j.at("power").get_to(c.power);
  j.at("energy").get_to(c.energy);
  j.at("line").get_to(c.line);
  return c;
}

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace detail

inline void write_expansion(const ExpansionRecord& r, const fs::path& path) {
  const auto& s = r.sol;
  nlohmann::json j = {
      {"status", lp::to_string(s.status)},
      {"converged", s.converged},
      {"objective", s.objective},
      {"iterations", r.iterations},
      {"lower_bound", r.lower},
      {"upper_bound", r.upper},
      {"gap", r.gap},
      {"new_capacity", s.new_capacity},
      {"retirement", s.retirement},
      {"new_power", s.new_power},
      {"new_energy", s.new_energy},
      {"line_expansion", s.line_expansion},
      {"capacities", detail::capacities_json(s.capacities)},
      {"costs", detail::costs_json(s.costs)},
      {"predicted_generation", detail::tech_map(r.predicted_generation)},
      {"predicted_variable_cost", r.predicted_variable}};
  detail::write_json(j, path);
}

inline ExpansionRecord load_expansion(const fs::path& path) {
  auto j = detail::read_json(path);
  ExpansionRecord r;
  try {
    auto& s = r.sol;
    s.status = j.at("status").get<std::string>() == "optimal" ? lp::Status::optimal
                                                               : lp::Status::failed;
    s.converged = j.at("converged").get<bool>();
    s.objective = j.at("objective").get<double>();
    j.at("new_capacity").get_to(s.new_capacity);
    j.at("retirement").get_to(s.retirement);
    j.at("new_power").get_to(s.new_power);
    j.at("new_energy").get_to(s.new_energy);
    j.at("line_expansion").get_to(s.line_expansion);
    s.capacities = detail::capacities_json(j.at("capacities"));
    s.costs = detail::costs_json(j.at("costs"));
    r.predicted_generation = detail::tech_map(j.at("predicted_generation"));
    r.predicted_variable = j.at("predicted_variable_cost").get<double>();
    r.iterations = j.value("iterations", 0);
    r.lower = j.value("lower_bound", 0.0);
    r.upper = j.value("upper_bound", 0.0);
    r.gap = j.value("gap", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return r;
}

inline void write_outcome(const CaseOutcome& o, const fs::path& path) {
  nlohmann::json prices = nlohmann::json::object();
  for (const auto& [r, a] : o.hourly_price) prices[r] = a;
  nlohmann::json gen = nlohmann::json::object();
  for (const auto& [t, d] : o.phase.generation)
    gen[std::string(to_string(t))] = {d.predicted, d.actual};
  nlohmann::json j = {
      {"costs", detail::costs_json(o.fin.costs)},
      {"profit_excl_fixed", o.fin.profit},
      {"emissions", o.fin.emissions},
      {"nse", o.fin.nse},
      {"line_capacity", o.line_capacity},
      {"hourly_price", prices},
      {"phase_generation", gen},
      {"phase_variable_cost",
       {o.phase.variable_cost.predicted, o.phase.variable_cost.actual}}};
  detail::write_json(j, path);
}

inline CaseOutcome load_outcome(const fs::path& path) {
  auto j = detail::read_json(path);
  CaseOutcome o;
  try {
    o.fin.costs = detail::costs_json(j.at("costs"));
    j.at("profit_excl_fixed").get_to(o.fin.profit);
    j.at("emissions").get_to(o.fin.emissions);
    j.at("nse").get_to(o.fin.nse);
    j.at("line_capacity").get_to(o.line_capacity);
    j.at("hourly_price").get_to(o.hourly_price);
    for (const auto& [k, v] : j.at("phase_generation").items()) {
      auto t = parse_tech(k);
      if (!t) throw Error("unknown technology '" + k + "'");
      o.phase.generation[*t] = {v.at(0).get<double>(), v.at(1).get<double>()};
    }
    const auto& pv = j.at("phase_variable_cost");
    o.phase.variable_cost = {pv.at(0).get<double>(), pv.at(1).get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return o;
}

inline SiteAllocation load_allocation(const fs::path& path) {
  SiteAllocation a;
  for (const auto& row :
       csv::read(path, {"entity_kind", "entity_id", "mw", "provenance_cluster"})) {
    const auto kind = row.str("entity_kind");
    const auto id = row.str("entity_id");
    double mw = row.num("mw");
    a.entries.push_back({kind, id, mw, row.str("provenance_cluster")});
    if (kind == "site") a.site_mw[id] += mw;
    else if (kind == "unit_retired") a.unit_retired[id] += mw;
    else if (kind == "thermal_new") a.thermal_new[id] += mw;
    else if (kind == "storage_power") a.storage_new[id].first += mw;
    else if (kind == "storage_energy") a.storage_new[id].second += mw;
    else if (kind == "line") a.line_mw[id] = mw;
    else throw InputError(path.string() + ": unknown entity_kind '" + kind + "'");
  }
  return a;
}

// Ids are resolved against the case: clusters, then storage, then lines.
inline Capacities load_portfolio(const fs::path& path, const SystemCase& c) {
  Capacities p;
  for (const auto& row : csv::read(path, {"fine_cluster", "mw"})) {
    const auto id = row.str("fine_cluster");
    double mw = row.num("mw");
    if (find_by_id(c.clusters, id)) {
      p.cluster[id] = mw;
    } else if (find_by_id(c.storage, id)) {
      p.power[id] = mw;
      p.energy[id] = row.num("mwh");
    } else if (find_by_id(c.lines, id)) {
      p.line[id] = mw;
    } else {
      throw InputError(path.string() + ": unknown id '" + id + "'");
    }
  }
  return p;
}

struct CaseResult {
  Combo combo;
  bool ok = false;
  std::string error;
  int n_regions = 0;
  int k = 0;  // representative periods used
  double runtime_s = 0;
  ExpansionRecord expansion;
  CaseOutcome outcome;
};

inline RegionPartition partition_for(const Combo& combo, const SystemCase& fine) {
  if (combo.partition_file) return load_partition(*combo.partition_file);
  if (combo.n_regions == static_cast<int>(fine.regions.size()))
    return identity_partition(fine);
  return block_partition(fine, combo.n_regions);
}

// Runs one combination end to end, writing its artifacts under `dir`.
inline CaseResult run_case(const RunConfig& rc, const SystemCase& fine,
                           const Combo& combo, const fs::path& dir) {
  CaseResult res;
  res.combo = combo;
  auto t0 = std::chrono::steady_clock::now();
  std::string stage;
  auto begin = [&](const char* s) { stage = s; };
  try {
    begin("setup");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

    begin("aggregate");
    RegionPartition part = partition_for(combo, fine);
    SystemCase coarse = aggregate_spatial(fine, part);
    res.n_regions = static_cast<int>(coarse.regions.size());
    write_partition(part, dir / "partition.csv");

    begin("cluster");
    TemporalReduction red =
        combo.k == 0 ? full_reduction(coarse)
                     : cluster_timesteps(coarse, combo.k, rc.force_extremes, rc.seed);
    SystemCase reduced = apply_temporal(coarse, red);
    reduced.uc = combo.uc;
    res.k = static_cast<int>(red.size());
    write_reduction(red, dir / "reduction.csv");
    write_case(reduced, dir / "phase1_case");

    begin("expand");
    BendersState st;
    auto sol = solve_benders(reduced, combo.uc, true, rc.benders, &st);
    if (sol.status != lp::Status::optimal)
      throw Error("expansion failed: " + sol.message);
    {
      std::ofstream log(dir / "benders.csv");
      write_benders_log(st, log);
    }
    ExpansionRecord& er = res.expansion;
    er.predicted_generation = generation_by_tech(reduced, sol.dispatch);
    er.predicted_variable = sol.costs.variable + sol.costs.carbon;
    er.iterations = st.iterations;
    er.lower = st.lower;
    er.upper = st.upper;
    er.gap = st.gap();
    er.sol = std::move(sol);
    write_expansion(er, dir / "expansion.json");

    begin("translate");
    TranslateOptions topt;
    topt.backbone_beta = rc.backbone_beta;
    Translation tr = translate(er.sol, coarse, fine, part, topt);
    write_allocation(tr.allocation, dir / "allocation.csv");
    write_portfolio(tr.portfolio, dir / "portfolio.csv");

    begin("operate");
    if (rc.dump_lp) {
      std::ofstream out(dir / "operations.lp");
      lp::write_lp(build_operations_lp(tr.hr_case, tr.portfolio, UcMode::relaxed).lp,
                   out);
    }
    auto ops = solve_operations(tr.hr_case, tr.portfolio, UcMode::relaxed);
    if (ops.status != lp::Status::optimal)
      throw Error("operations LP " + std::string(lp::to_string(ops.status)) +
                  (ops.message.empty() ? "" : ": " + ops.message));
    for (const auto& [r, p] : ops.dispatch.price)
      for (double v : p)
        if (v < -1e-6 || v > tr.hr_case.nse_cost * (1 + 1e-9) + 1e-6)
          throw Error("price " + csv::fmt(v) + " outside [0, nse_cost] in " + r);

    begin("metrics");
    res.outcome = summarize_case(
        tr.allocation, tr.hr_case, ops,
        phase_compare(er.predicted_generation, er.predicted_variable, tr.hr_case, ops));
    write_outcome(res.outcome, dir / "outcome.json");
    res.ok = true;
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = StageError(stage, e.what()).what();
  }
  res.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

struct LadderResult {
  std::vector<CaseResult> cases;
  std::vector<MetricsReport> reports;  // successful combos, in combo order
  int failures = 0;
};

inline void write_ladder(const LadderResult& lr, const fs::path& path) {
  csv::Writer w(path, {"combo", "n_regions", "k", "uc", "runtime_s", "sco_solar",
                       "sco_wind", "mse_cap", "mse_profit", "mse_emiss",
                       "total_cost", "nse", "emissions"});
  std::size_t r = 0;
  for (const auto& c : lr.cases) {
    if (!c.ok) continue;
    const auto& m = lr.reports[r++];
    w(c.combo.name, c.n_regions, c.k, to_string(c.combo.uc), c.runtime_s,
      m.sco.at(Tech::solar), m.sco_wind, m.mse_cap, m.mse_profit, m.mse_emiss,
      m.total_cost(), m.total_nse(), m.total_emissions());
  }
  w.close();
}

// Runs the baseline, then the remaining combos on up to rc.jobs threads.
inline LadderResult run_ladder(const RunConfig& rc, std::ostream* log = nullptr) {
  check_run_config(rc);
  SystemCase fine = load_fine_case(rc);
  auto combos = make_combos(rc, fine);
  if (combos.size() < 2)
    throw ConfigError("run config: a ladder needs at least one combo besides the baseline");

  std::error_code ec;
  fs::create_directories(rc.out_dir, ec);
  if (ec) throw Error("cannot create " + rc.out_dir.string() + ": " + ec.message());
  write_case(fine, rc.out_dir / "fine_case");

  std::mutex log_mu;
  auto note = [&](const CaseResult& r) {
    if (!log) return;
    std::lock_guard<std::mutex> lock(log_mu);
    *log << (r.ok ? "ok     " : "FAILED ") << r.combo.name << "  "
         << csv::fmt(std::round(r.runtime_s * 100) / 100) << " s"
         << (r.ok ? "" : "  " + r.error) << '\n';
  };

  LadderResult lr;
  lr.cases.resize(combos.size());
  lr.cases[0] = run_case(rc, fine, combos[0], rc.out_dir / combos[0].name);
  note(lr.cases[0]);
  if (!lr.cases[0].ok) throw Error("baseline failed: " + lr.cases[0].error);

  std::atomic<std::size_t> next{1};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < combos.size();) {
      if (combos[i].same_as_hrb) {
        lr.cases[i] = lr.cases[0];
        lr.cases[i].combo = combos[i];
        std::error_code cec;
        fs::copy(rc.out_dir / combos[0].name, rc.out_dir / combos[i].name,
                 fs::copy_options::recursive | fs::copy_options::overwrite_existing, cec);
        if (cec) {
          lr.cases[i].ok = false;
          lr.cases[i].error = StageError("setup", cec.message()).what();
        }
      } else {
        lr.cases[i] = run_case(rc, fine, combos[i], rc.out_dir / combos[i].name);
      }
      note(lr.cases[i]);
    }
  };
  int jobs = std::max(1, std::min<int>(rc.jobs, static_cast<int>(combos.size()) - 1));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const CaseOutcome& hrb = lr.cases[0].outcome;
  for (auto& c : lr.cases) {
    if (!c.ok) {
      ++lr.failures;
      continue;
    }
    try {
      lr.reports.push_back(make_report(c.combo.name, fine, c.outcome, hrb));
    } catch (const std::exception& e) {
      c.ok = false;
      c.error = StageError("metrics", e.what()).what();
      ++lr.failures;
    }
  }
  write_ladder(lr, rc.out_dir / "ladder.csv");
  write_report(lr.reports, rc.out_dir / "report.csv");
  {
    csv::Writer w(rc.out_dir / "failures.csv", {"combo", "error"});
    for (const auto& c : lr.cases)
      if (!c.ok) {
        std::string msg = c.error;
        std::replace(msg.begin(), msg.end(), '"', '\'');
        w(c.combo.name, "\"" + msg + "\"");
      }
    w.close();
  }
  return lr;
}

}  // namespace gridres
