#pragma once

// Seeded synthetic test systems: fine regions on a line, spatially
// correlated weather, a gas fleet per region and candidate VRE sites.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridres/core.hpp"
#include "gridres/io.hpp"
#include "gridres/resolution/spatial.hpp"
#include "gridres/rng.hpp"

namespace gridres {

enum class Pathway { bau, cp };

inline std::string_view to_string(Pathway p) { return p == Pathway::cp ? "CP" : "BAU"; }

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_fine_regions = 6;
  int solar_sites = 2;  // per region
  int onshore_sites = 2;
  int offshore_fixed_sites = 0;  // per region, coastal (last) region only
  int offshore_floating_sites = 0;
  int units_per_region = 3;
  int periods = 8;
  int period_length = 24;
  double correlation_length = 2.0;  // in regions
  double demand_peak_lo = 800;      // MW
  double demand_peak_hi = 1600;
  Pathway pathway = Pathway::bau;

  void check() const {
    if (n_fine_regions < 1 || solar_sites < 0 || onshore_sites < 0 ||
        offshore_fixed_sites < 0 || offshore_floating_sites < 0 ||
        units_per_region < 1 || periods < 1 ||
        (period_length != 24 && period_length != 168))
      throw Error("synth config: counts must be >= 1, period_length 24 or 168");
    if (!(correlation_length > 0))
      throw Error("synth config: correlation_length must be > 0");
    if (!(demand_peak_lo > 0) || demand_peak_hi < demand_peak_lo)
      throw Error("synth config: invalid demand peak range");
  }
};

inline void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = {{"seed", c.seed},
       {"n_fine_regions", c.n_fine_regions},
       {"solar_sites", c.solar_sites},
       {"onshore_sites", c.onshore_sites},
       {"offshore_fixed_sites", c.offshore_fixed_sites},
       {"offshore_floating_sites", c.offshore_floating_sites},
       {"units_per_region", c.units_per_region},
       {"periods", c.periods},
       {"period_length", c.period_length},
       {"correlation_length", c.correlation_length},
       {"demand_peak_lo", c.demand_peak_lo},
       {"demand_peak_hi", c.demand_peak_hi},
       {"pathway", std::string(to_string(c.pathway))}};
}

inline void from_json(const nlohmann::json& j, SynthConfig& c) {
  SynthConfig d;
  c.seed = j.value("seed", d.seed);
  c.n_fine_regions = j.value("n_fine_regions", d.n_fine_regions);
  c.solar_sites = j.value("solar_sites", d.solar_sites);
  c.onshore_sites = j.value("onshore_sites", d.onshore_sites);
  c.offshore_fixed_sites = j.value("offshore_fixed_sites", d.offshore_fixed_sites);
  c.offshore_floating_sites =
      j.value("offshore_floating_sites", d.offshore_floating_sites);
  c.units_per_region = j.value("units_per_region", d.units_per_region);
  c.periods = j.value("periods", d.periods);
  c.period_length = j.value("period_length", d.period_length);
  c.correlation_length = j.value("correlation_length", d.correlation_length);
  c.demand_peak_lo = j.value("demand_peak_lo", d.demand_peak_lo);
  c.demand_peak_hi = j.value("demand_peak_hi", d.demand_peak_hi);
  std::string p = j.value("pathway", std::string("BAU"));
  if (p == "BAU") c.pathway = Pathway::bau;
  else if (p == "CP") c.pathway = Pathway::cp;
  else throw Error("synth config: unknown pathway '" + p + "'");
}

// FNV-1a over the canonical JSON form of the config.
inline std::string config_digest(const SynthConfig& c) {
  std::string s = nlohmann::json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

// Per-region series of AR(1) noise whose innovations are correlated across
// regions as exp(-|i-j| / length).
class CorrelatedNoise {
 public:
  CorrelatedNoise(int n, double length, double phi)
      : n_(n), phi_(phi), state_(Eigen::VectorXd::Zero(n)) {
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        cov(i, j) = std::exp(-std::abs(i - j) / length);
    cov.diagonal().array() += 1e-9;
    chol_ = cov.llt().matrixL();
  }

  const Eigen::VectorXd& step(XorShift64Star& rng) {
    Eigen::VectorXd z(n_);
    for (int i = 0; i < n_; ++i) z(i) = rng.normal();
    state_ = phi_ * state_ + std::sqrt(1 - phi_ * phi_) * (chol_ * z);
    return state_;
  }

 private:
  int n_;
  double phi_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd state_;
};

inline double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

inline std::string region_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "z%02d", i + 1);
  return buf;
}

}  // namespace detail

inline SystemCase generate(const SynthConfig& cfg) {
  cfg.check();
  XorShift64Star rng(cfg.seed);
  const int R = cfg.n_fine_regions;
  const int L = cfg.period_length;
  const int H = cfg.periods * L;
  const double pi = 3.141592653589793;
  auto spread = [R](int r) { return R > 1 ? double(r) / (R - 1) : 0.5; };

  SystemCase c;
  c.period_length = L;
  c.year_scale = 8760.0 / H;
  c.carbon_fee = cfg.pathway == Pathway::cp ? 200.0 : 0.0;
  c.nse_cost = 2000;

  // Calendar: periods spread evenly over the year.
  std::vector<double> day(H), hour(H);
  for (int t = 0; t < H; ++t) {
    int p = t / L, h = t % L;
    double start = std::floor((p + 0.5) * 365.0 / cfg.periods);
    day[t] = start + h / 24;
    hour[t] = h % 24;
  }

  std::vector<double> pop(R), peak(R);
  double max_pop = 0;
  for (int r = 0; r < R; ++r) {
    pop[r] = std::round(rng.uniform(3e5, 3e6));
    max_pop = std::max(max_pop, pop[r]);
  }
  for (int r = 0; r < R; ++r)
    peak[r] = cfg.demand_peak_lo +
              (cfg.demand_peak_hi - cfg.demand_peak_lo) * pop[r] / max_pop;

  // Weather: hourly AR(1) wind and load noise, daily cloudiness.
  detail::CorrelatedNoise wind_n(R, cfg.correlation_length, 0.9);
  detail::CorrelatedNoise load_n(R, cfg.correlation_length, 0.8);
  detail::CorrelatedNoise cloud_n(R, cfg.correlation_length, 0.5);
  std::vector<std::vector<double>> solar(R, std::vector<double>(H)),
      wind(R, std::vector<double>(H)), offshore(R, std::vector<double>(H));
  std::vector<double> cloud(R, 0.0);
  c.regions.resize(R);
  for (auto& reg : c.regions) reg.demand.resize(H);
  for (int t = 0; t < H; ++t) {
    if (t == 0 || day[t] != day[t - 1]) {
      const auto& z = cloud_n.step(rng);
      for (int r = 0; r < R; ++r) cloud[r] = 1.0 / (1.0 + std::exp(-z(r)));
    }
    const auto& w = wind_n.step(rng);
    const auto& d = load_n.step(rng);
    double season = std::cos(2 * pi * (day[t] - 172) / 365);
    double sun = std::max(0.0, std::sin(pi * (hour[t] - 6) / 12));
    double wind_season = std::cos(2 * pi * (day[t] - 15) / 365);
    double diurnal = 0.5 - 0.5 * std::cos(2 * pi * (hour[t] - 4) / 24);
    for (int r = 0; r < R; ++r) {
      double q_sun = 0.95 - 0.25 * spread(r);
      double q_wind = 0.7 + 0.3 * spread(r);
      solar[r][t] = detail::clip01(q_sun * sun * (0.8 + 0.2 * season) *
                                   (1 - 0.6 * cloud[r]));
      double base = 0.38 + 0.1 * wind_season +
                    0.05 * std::cos(2 * pi * (hour[t] - 3) / 24);
      wind[r][t] = detail::clip01(q_wind * (base + 0.22 * w(r)));
      offshore[r][t] = detail::clip01(base + 0.12 + 0.2 * w(r));
      double load = 0.6 + 0.12 * season + 0.18 * diurnal + 0.04 * d(r);
      c.regions[r].demand[t] = std::max(0.05, load) * peak[r];
    }
  }

  for (int r = 0; r < R; ++r) {
    auto& reg = c.regions[r];
    reg.id = detail::region_name(r);
    reg.urban_population = pop[r];
    reg.reserve_margin = 0.15;
  }

  auto add_sites = [&](int r, Tech tech, int count,
                       const std::vector<double>& base, double capital) {
    const std::string& rid = c.regions[r].id;
    for (int i = 0; i < count; ++i) {
      Site s;
      s.id = rid + "_" + std::string(to_string(tech)) + "_s" +
             std::to_string(i + 1);
      s.fine_region = rid;
      s.cluster = rid + "_" + std::string(to_string(tech));
      s.tech = tech;
      s.capacity_limit = std::round(rng.uniform(150, 450));
      double quality = rng.uniform(0.85, 1.0) * (1.0 - 0.05 * i);
      s.profile.resize(H);
      double cf = 0;
      for (int t = 0; t < H; ++t) {
        double noise = base[t] > 0 ? 0.02 * rng.normal() : 0.0;
        s.profile[t] = detail::clip01(base[t] * quality + noise);
        cf += s.profile[t];
      }
      cf /= H;
      double annual = capital * (1 + 0.08 * i) * rng.uniform(0.95, 1.05);
      s.lcoe = std::min(190.0, annual / (std::max(cf, 1e-3) * 8760));
      s.spur_cost = std::round(rng.uniform(3000, 8000));
      s.spur_capacity = s.capacity_limit;
      s.spur_sink = rid;
      c.sites.push_back(std::move(s));
    }
    if (count > 0) {
      ResourceCluster k;
      k.id = rid + "_" + std::string(to_string(tech));
      k.region = rid;
      k.tech = tech;
      k.ramp_rate = 1;
      c.clusters.push_back(std::move(k));
    }
  };

  for (int r = 0; r < R; ++r) {
    const std::string& rid = c.regions[r].id;
    add_sites(r, Tech::solar, cfg.solar_sites, solar[r], 60000);
    add_sites(r, Tech::onshore_wind, cfg.onshore_sites, wind[r], 90000);
    if (r == R - 1) {
      add_sites(r, Tech::offshore_fixed, cfg.offshore_fixed_sites, offshore[r],
                150000);
      add_sites(r, Tech::offshore_floating, cfg.offshore_floating_sites,
                offshore[r], 190000);
    }

    // Gas plant: units with strictly increasing heat rates.
    ResourceCluster g;
    g.id = thermal_cluster_id(rid, Tech::natural_gas);
    g.region = rid;
    g.tech = Tech::natural_gas;
    g.inv_cost = 95000;
    g.fom_cost = 12000;
    g.min_output = 0.3;
    g.ramp_rate = 0.5;
    g.start_cost = 60;
    g.emission_factor = 0.053;
    g.fuel_cost = 3.5;
    g.vom = 3;
    std::vector<double> hr, cap;
    for (int u = 0; u < cfg.units_per_region; ++u) {
      ThermalUnit unit;
      unit.id = rid + "_gas_u" + std::to_string(u + 1);
      unit.fine_region = rid;
      unit.plant = g.id;
      unit.capacity = std::round(rng.uniform(100, 250));
      unit.heat_rate = 6.5 * (1 + 0.25 * u) + rng.uniform(0, 0.1);
      unit.min_output = g.min_output;
      unit.ramp_rate = g.ramp_rate;
      unit.start_cost = g.start_cost;
      unit.emission_factor = g.emission_factor;
      unit.fuel_cost = g.fuel_cost;
      unit.vom = g.vom;
      g.existing_capacity += unit.capacity;
      hr.push_back(unit.heat_rate);
      cap.push_back(unit.capacity);
      c.units.push_back(std::move(unit));
    }
    g.heat_rate = weighted_mean(hr, cap);
    g.max_new_capacity = std::round(2 * peak[r]);
    c.clusters.push_back(std::move(g));

    StorageCluster b;
    b.id = storage_cluster_id(rid);
    b.region = rid;
    b.power_cost = 25000;
    b.energy_cost = 8000;
    b.efficiency_rt = 0.85;
    c.storage.push_back(std::move(b));

    if (r + 1 < R) {
      TransmissionLine l;
      l.from = l.fine_from = rid;
      l.to = l.fine_to = detail::region_name(r + 1);
      l.id = "l_" + l.from + "_" + l.to;
      l.kind = LineKind::interregional;
      l.capacity = std::round(rng.uniform(200, 500));
      l.expansion_cost = std::round(rng.uniform(15000, 30000));
      l.max_expansion = 1000;
      c.lines.push_back(std::move(l));
    }
  }

  reset_periods(c);
  canonicalize(c);
  refresh_derived(c);
  return aggregate_spatial(c, identity_partition(c));
}

}  // namespace gridres
