// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#include "stfilm/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>

#include <json.hpp>

namespace stfilm {

namespace {

// 17 significant digits round-trip doubles exactly in decimal.
std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

MomentStats estimate_moment(const std::vector<double>& xs, double order) {
  MomentStats s;
  s.order = order;
  const size_t m = xs.size();
  if (m == 0) return s;
  CompensatedSum<double> sum, sq;
  for (double x : xs) {
    const double v = order == 1.0 ? x : std::pow(x, order);
    sum.add(v);
    sq.add(v * v);
  }
  s.mean = sum.value() / double(m);
  if (m > 1) {
    const double var =
        std::max(0.0, (sq.value() - double(m) * s.mean * s.mean) / double(m - 1));
    s.std_error = std::sqrt(var / double(m));
  }
  return s;
}

QuantityEstimate estimate_quantity(const std::string& name,
                                   const std::vector<double>& xs,
                                   const std::vector<double>& orders) {
  QuantityEstimate q;
  q.name = name;
  for (double p : orders) q.moments.push_back(estimate_moment(xs, p));
  return q;
}

nlohmann::json moments_json(const QuantityEstimate& q) {
  nlohmann::json arr = nlohmann::json::array();
  for (const MomentStats& m : q.moments)
    arr.push_back({{"order", m.order}, {"mean", m.mean}, {"std_error", m.std_error}});
  return {{"name", q.name}, {"moments", arr}};
}

nlohmann::json ensemble_json(const EnsembleReport& r) {
  nlohmann::json integrals = nlohmann::json::array();
  for (const QuantityEstimate& q : r.integrals) integrals.push_back(moments_json(q));
  nlohmann::json path_summaries = nlohmann::json::array();
  for (const PathRecord& p : r.paths) {
    nlohmann::json ps{{"sup_r", p.sup_r},
                      {"sup_mass_dev", p.sup_mass_dev},
                      {"steps", p.steps},
                      {"rejects", p.rejects},
                      {"oscillation_violations", p.oscillation_violations},
                      {"excluded", p.excluded}};
    if (p.stopping)
      ps["stopping"] = {
          {"time", p.stopping->time},
          {"cause", p.stopping->cause == StoppingCause::energy ? "energy" : "mass"}};
    path_summaries.push_back(ps);
  }
  return {{"nodes", r.nodes},
          {"h", r.h},
          {"n_paths", r.n_paths},
          {"excluded", r.excluded},
          {"stopped_energy", r.stopped_energy},
          {"stopped_mass", r.stopped_mass},
          {"stopped_fraction", r.stopped_fraction()},
          {"oscillation_violations", r.oscillation_violations},
          {"stopping_times", r.stopping_times},
          {"sup_r", moments_json(r.sup_r)},
          {"integrals", integrals},
          {"mass_drift",
           {{"order", r.mass_drift.order},
            {"mean", r.mass_drift.mean},
            {"std_error", r.mass_drift.std_error}}},
          {"paths", path_summaries}};
}

}  // namespace

FieldD make_initial_field(const GridD& grid, const InitialData& init) {
  init.validate();
  const double L = grid.length;
  return interpolate<double>(grid, [&](double x) {
    return init.base + init.amplitude * std::cos(2.0 * std::numbers::pi * x / L);
  });
}

EnsembleReport run_ensemble(const GridD& grid, const EnsembleConfig& ens,
                            const SchemeConfig& scheme, const ModelParams<double>& mp,
                            const NoiseSpec& noise, const InitialData& u0) {
  ens.validate();
  scheme.validate();
  mp.validate();
  noise.validate();

  const FieldD initial = make_initial_field(grid, u0);
  std::vector<PathRecord> records(static_cast<size_t>(ens.n_paths));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= ens.n_paths) return;
      records[static_cast<size_t>(k)] =
          run_path(initial, scheme, mp, noise, static_cast<std::uint64_t>(k));
    }
  };
  if (ens.workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < ens.workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Fold in path order: the merge is associative and independent of the
  // worker count because every path is keyed by its index.
  EnsembleReport rep;
  rep.nodes = grid.node_count;
  rep.h = grid.spacing();
  rep.n_paths = ens.n_paths;

  std::vector<double> sup_r, drift;
  std::map<std::string, std::vector<double>> ints;
  for (const PathRecord& p : records) {
    if (p.excluded) {
      ++rep.excluded;
      continue;
    }
    sup_r.push_back(p.sup_r);
    drift.push_back(p.sup_mass_dev);
    ints["int_q_pressure"].push_back(p.int_q_pressure);
    ints["int_q_entropy_diss"].push_back(p.int_q_entropy_diss);
    ints["int_q_quartic"].push_back(p.int_q_quartic);
    ints["int_q_laplacian"].push_back(p.int_q_laplacian);
    ints["int_q_weighted_lap"].push_back(p.int_q_weighted_lap);
    ints["int_q_singular"].push_back(p.int_q_singular);
    ints["int_q_log"].push_back(p.int_q_log);
    rep.oscillation_violations += p.oscillation_violations;
    if (p.stopping) {
      rep.stopping_times.push_back(p.stopping->time);
      if (p.stopping->cause == StoppingCause::energy)
        ++rep.stopped_energy;
      else
        ++rep.stopped_mass;
    }
  }
  rep.sup_r = estimate_quantity("sup_r", sup_r, ens.moment_orders);
  for (const auto& [name, xs] : ints)
    rep.integrals.push_back(estimate_quantity(name, xs, ens.moment_orders));
  rep.mass_drift = estimate_moment(drift, 1.0);
  rep.paths = std::move(records);
  return rep;
}

MassStudyReport mass_drift_study(const EnsembleConfig& ens, const SchemeConfig& scheme,
                                 const ModelParams<double>& mp, const NoiseSpec& noise,
                                 const InitialData& u0) {
  if (ens.h_list.size() < 3)
    throw ConfigError("ensemble.h_list: refinement study needs at least 3 levels");
  MassStudyReport study;
  for (double h : ens.h_list) {
    const double nodes_real = mp.length / h;
    const Index nodes = static_cast<Index>(std::llround(nodes_real));
    if (nodes < 3 || std::abs(nodes_real - double(nodes)) > 1e-9 * nodes_real)
      throw ConfigError("ensemble.h_list: L/h must be an integer node count");
    const GridD grid(mp.length, nodes);
    EnsembleReport rep = run_ensemble(grid, ens, scheme, mp, noise, u0);
    study.h_values.push_back(grid.spacing());
    study.drifts.push_back(rep.mass_drift);
    study.runs.push_back(std::move(rep));
  }
  // log-log least squares for the drift slope
  const size_t m = study.h_values.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    const double x = std::log(study.h_values[i]);
    const double y = std::log(std::max(study.drifts[i].mean, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = double(m) * sxx - sx * sx;
  study.slope = denom != 0.0 ? (double(m) * sxy - sx * sy) / denom : 0.0;
  study.intercept = (sy - study.slope * sx) / double(m);
  return study;
}

std::string report_json(const EnsembleReport& report) {
  nlohmann::json j{{"schema", 1}, {"kind", "ensemble"}, {"report", ensemble_json(report)}};
  return j.dump(2);
}

std::string report_json(const MassStudyReport& report) {
  nlohmann::json runs = nlohmann::json::array();
  for (const EnsembleReport& r : report.runs) runs.push_back(ensemble_json(r));
  nlohmann::json drifts = nlohmann::json::array();
  for (size_t i = 0; i < report.h_values.size(); ++i)
    drifts.push_back({{"h", report.h_values[i]},
                      {"mean", report.drifts[i].mean},
                      {"std_error", report.drifts[i].std_error}});
  nlohmann::json j{{"schema", 1},
                   {"kind", "mass_study"},
                   {"slope", report.slope},
                   {"intercept", report.intercept},
                   {"drifts", drifts},
                   {"runs", runs}};
  return j.dump(2);
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

void write_trajectories_csv(const std::vector<PathRecord>& paths, const GridD& grid,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "path,t,x,u\n";
  for (size_t k = 0; k < paths.size(); ++k) {
    const PathRecord& p = paths[k];
    for (size_t s = 0; s < p.sample_times.size(); ++s)
      for (Index i = 0; i < grid.node_count; ++i)
        out << k << ',' << fmt17(p.sample_times[s]) << ',' << fmt17(grid.node(i))
            << ',' << fmt17(p.sample_fields[s][i]) << '\n';
  }
}

void write_diagnostics_csv(const std::vector<PathRecord>& paths,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "path,t,energy,entropy,combined_r,osc_ratio,min_u,mean_u,q_pressure,"
         "q_laplacian,q_quartic,q_weighted_lap,q_singular,q_log,q_entropy_diss,"
         "ito_energy\n";
  for (size_t k = 0; k < paths.size(); ++k) {
    for (const DiagnosticsRecord& d : paths[k].diagnostics) {
      out << k << ',' << fmt17(d.time) << ',' << fmt17(d.energy) << ','
          << fmt17(d.entropy) << ',' << fmt17(d.combined_r) << ','
          << fmt17(d.osc_ratio) << ',' << fmt17(d.min_u) << ',' << fmt17(d.mean_u)
          << ',' << fmt17(d.q_pressure) << ',' << fmt17(d.q_laplacian) << ','
          << fmt17(d.q_quartic) << ',' << fmt17(d.q_weighted_lap) << ','
          << fmt17(d.q_singular) << ',' << fmt17(d.q_log) << ','
          << fmt17(d.q_entropy_diss) << ',' << fmt17(d.ito_energy) << '\n';
    }
  }
}

}  // namespace

void persist(const EnsembleReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir + "/report.json", report_json(report));
  const GridD grid(report.h * double(report.nodes), report.nodes);
  write_trajectories_csv(report.paths, grid, dir + "/trajectories.csv");
  write_diagnostics_csv(report.paths, dir + "/diagnostics.csv");
}

void persist(const MassStudyReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir + "/report.json", report_json(report));
}

}  // namespace stfilm
