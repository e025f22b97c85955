// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stfilm/config.hpp"
#include "stfilm/diagnostics.hpp"
#include "stfilm/ensemble.hpp"
#include "stfilm/plots.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed{0};
  bool seed_set{false};
  int samples{0};
};

int run_simulate(const stfilm::RunConfig& cfg) {
  stfilm::EnsembleReport report =
      stfilm::run_ensemble(cfg.grid(), cfg.ensemble, cfg.scheme, cfg.model, cfg.noise,
                           cfg.u0);
  stfilm::persist(report, cfg.ensemble.output_dir);
  stfilm::emit_plots(report, cfg.ensemble.output_dir);
  std::cout << "paths: " << report.n_paths << "  stopped: "
            << report.stopped_energy + report.stopped_mass
            << "  excluded: " << report.excluded << "\n"
            << "report: " << cfg.ensemble.output_dir << "/report.json\n";
  return kExitOk;
}

int run_verify(const stfilm::RunConfig& cfg) {
  const stfilm::VerifySummary summary = stfilm::verify_corpus(cfg.model, cfg.verify);
  std::cout << stfilm::verify_summary_json(summary) << "\n";
  return summary.ok() ? kExitOk : kExitVerifyFailed;
}

int run_mass_study(const stfilm::RunConfig& cfg) {
  stfilm::MassStudyReport study = stfilm::mass_drift_study(
      cfg.ensemble, cfg.scheme, cfg.model, cfg.noise, cfg.u0);
  stfilm::persist(study, cfg.ensemble.output_dir);
  stfilm::emit_plots(study, cfg.ensemble.output_dir);
  std::cout << "fitted mass-drift slope: " << study.slope << "\n"
            << "report: " << cfg.ensemble.output_dir << "/report.json\n";
  return kExitOk;
}

int run_constants(const stfilm::RunConfig& cfg) {
  std::cout << stfilm::constants_json(cfg) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stfilm: semi-discrete finite-element simulation of the stochastic "
               "thin-film equation with singular potential"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub, bool with_seed, bool with_out, bool with_samples) {
    sub->add_option("--config", args.config_path, "JSON run configuration")->required();
    if (with_seed) sub->add_option("--seed", args.seed, "override noise.seed");
    if (with_out) sub->add_option("--out", args.out_dir, "override output directory");
    if (with_samples)
      sub->add_option("--samples", args.samples, "override verification sample count");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run a seeded ensemble");
  add_common(simulate, true, true, false);
  CLI::App* verify =
      app.add_subcommand("verify", "run the discrete-identity verification corpus");
  add_common(verify, false, false, true);
  CLI::App* mass = app.add_subcommand("mass-study", "mass-drift refinement study");
  add_common(mass, true, true, false);
  CLI::App* constants =
      app.add_subcommand("constants", "print the derived scheme constants as JSON");
  add_common(constants, false, false, false);

  CLI11_PARSE(app, argc, argv);

  try {
    stfilm::RunConfig cfg = stfilm::load_run_config(args.config_path);
    if (simulate->count("--seed") || mass->count("--seed")) cfg.noise.seed = args.seed;
    if (!args.out_dir.empty()) cfg.ensemble.output_dir = args.out_dir;
    if (verify->count("--samples")) cfg.verify.samples = args.samples;

    if (simulate->parsed()) return run_simulate(cfg);
    if (verify->parsed()) return run_verify(cfg);
    if (mass->parsed()) return run_mass_study(cfg);
    if (constants->parsed()) return run_constants(cfg);
  } catch (const stfilm::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
