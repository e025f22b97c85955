// SPDX-FileCopyrightText: Copyright (c) 2026 The stfilm Authors
// SPDX-License-Identifier: Apache-2.0

#include "stfilm/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stfilm {

namespace {

using nlohmann::json;

double get_number(const json& j, const std::string& path, const char* key,
                  double fallback, bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(path + "." + key + ": required field missing");
    return fallback;
  }
  if (!j[key].is_number())
    throw ConfigError(path + "." + key + ": expected a number");
  return j[key].get<double>();
}

long get_integer(const json& j, const std::string& path, const char* key,
                 long fallback, bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(path + "." + key + ": required field missing");
    return fallback;
  }
  if (!j[key].is_number_integer())
    throw ConfigError(path + "." + key + ": expected an integer");
  return j[key].get<long>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
  return j[key].get<bool>();
}

const json& get_object(const json& j, const char* key, bool required,
                       const json& empty) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(std::string(key) + ": required section missing");
    return empty;
  }
  if (!j[key].is_object())
    throw ConfigError(std::string(key) + ": expected an object");
  return j[key];
}

NoiseSpec parse_noise(const json& j, double length, Index nodes) {
  NoiseSpec spec;
  spec.length = length;
  const long default_cutoff = nodes / 2;  // resolvable frequencies
  spec.cutoff = static_cast<int>(get_integer(j, "noise", "cutoff", default_cutoff));
  if (spec.cutoff < 0) throw ConfigError("noise.cutoff: must be nonnegative");
  spec.balanced = get_bool(j, "noise", "balanced", true);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw ConfigError("noise.seed: expected a 64-bit integer");
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  spec.lambdas.assign(static_cast<size_t>(2 * spec.cutoff + 1), 0.0);
  if (j.contains("lambdas")) {
    if (!j["lambdas"].is_array())
      throw ConfigError("noise.lambdas: expected an array of [ell, lambda] pairs");
    size_t idx = 0;
    for (const auto& entry : j["lambdas"]) {
      const std::string where = "noise.lambdas[" + std::to_string(idx++) + "]";
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() ||
          !entry[1].is_number())
        throw ConfigError(where + ": expected [ell, lambda]");
      const int ell = entry[0].get<int>();
      const double lambda = entry[1].get<double>();
      if (std::abs(ell) > spec.cutoff)
        throw ConfigError(where + ": |ell| exceeds the cutoff");
      if (lambda < 0.0) throw ConfigError(where + ": lambda must be nonnegative");
      spec.set_lambda(ell, lambda);
      if (spec.balanced && ell > 0 && spec.lambda(-ell) == 0.0)
        spec.set_lambda(-ell, lambda);
    }
  }
  spec.validate();
  return spec;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(origin + ": JSON parse error at byte " +
                      std::to_string(err.byte) + ": " + err.what());
  }
  if (!doc.is_object()) throw ConfigError(origin + ": top level must be an object");

  RunConfig cfg;
  static const json empty = json::object();

  cfg.schema = static_cast<int>(get_integer(doc, "", "schema", 1, true));
  if (cfg.schema != 1)
    throw ConfigError("schema: unsupported version " + std::to_string(cfg.schema));

  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) throw ConfigError("mode: expected a string");
    cfg.mode = doc["mode"].get<std::string>();
    if (cfg.mode != "simulate" && cfg.mode != "verify" && cfg.mode != "mass-study" &&
        cfg.mode != "constants")
      throw ConfigError("mode: must be simulate|verify|mass-study|constants");
  }

  const json& grid = get_object(doc, "grid", true, empty);
  const double length = get_number(grid, "grid", "length", 1.0, true);
  cfg.nodes = static_cast<Index>(get_integer(grid, "grid", "nodes", 0, true));
  if (cfg.nodes < 3) throw ConfigError("grid.nodes: need at least 3 nodes");
  if (!(length > 0)) throw ConfigError("grid.length: must be positive");

  const json& model = get_object(doc, "model", true, empty);
  cfg.model.length = length;
  cfg.model.n = get_number(model, "model", "n", 2.5, true);
  cfg.model.p = get_number(model, "model", "p", 4.0, true);
  cfg.model.c_f = get_number(model, "model", "c_f", 0.02, true);
  // kappa is mandatory: the estimates only hold for sufficiently large
  // kappa and no silent default is meaningful.
  cfg.model.kappa = get_number(model, "model", "kappa", 0.0, true);
  cfg.model.reg_s = get_number(model, "model", "s", 0.0);
  cfg.model.validate();

  const json& scheme = get_object(doc, "scheme", false, empty);
  cfg.scheme.t_max = get_number(scheme, "scheme", "t_max", 1.0);
  cfg.scheme.dt = get_number(scheme, "scheme", "dt", 1e-4);
  cfg.scheme.e_max = get_number(scheme, "scheme", "e_max", 0.0);
  cfg.scheme.implicit_theta = get_number(scheme, "scheme", "implicit_theta", 1.0);
  cfg.scheme.max_dt_halvings =
      static_cast<int>(get_integer(scheme, "scheme", "max_dt_halvings", 30));
  cfg.scheme.positivity_guard = get_number(scheme, "scheme", "positivity_guard", 1.0);
  cfg.scheme.sample_stride =
      static_cast<int>(get_integer(scheme, "scheme", "sample_stride", 1));
  cfg.scheme.validate();

  cfg.noise = parse_noise(get_object(doc, "noise", false, empty), length, cfg.nodes);

  const json& ens = get_object(doc, "ensemble", false, empty);
  cfg.ensemble.n_paths = static_cast<int>(get_integer(ens, "ensemble", "n_paths", 1));
  cfg.ensemble.workers = static_cast<int>(get_integer(ens, "ensemble", "workers", 1));
  if (ens.contains("moment_orders")) {
    if (!ens["moment_orders"].is_array())
      throw ConfigError("ensemble.moment_orders: expected an array");
    cfg.ensemble.moment_orders.clear();
    for (const auto& v : ens["moment_orders"]) {
      if (!v.is_number()) throw ConfigError("ensemble.moment_orders: expected numbers");
      cfg.ensemble.moment_orders.push_back(v.get<double>());
    }
  }
  if (ens.contains("h_list")) {
    if (!ens["h_list"].is_array())
      throw ConfigError("ensemble.h_list: expected an array of mesh sizes");
    for (const auto& v : ens["h_list"]) {
      if (!v.is_number()) throw ConfigError("ensemble.h_list: expected numbers");
      cfg.ensemble.h_list.push_back(v.get<double>());
    }
  }
  if (ens.contains("output_dir")) {
    if (!ens["output_dir"].is_string())
      throw ConfigError("ensemble.output_dir: expected a string");
    cfg.ensemble.output_dir = ens["output_dir"].get<std::string>();
  }
  cfg.ensemble.validate();

  const json& u0 = get_object(doc, "u0", false, empty);
  cfg.u0.base = get_number(u0, "u0", "base", 1.0);
  cfg.u0.amplitude = get_number(u0, "u0", "amplitude", 0.0);
  cfg.u0.validate();

  const json& verify = get_object(doc, "verify", false, empty);
  cfg.verify.samples = static_cast<int>(get_integer(verify, "verify", "samples", 1000));
  cfg.verify.tol_identity = get_number(verify, "verify", "tol", 1e-12);
  if (verify.contains("seed"))
    cfg.verify.seed = verify["seed"].get<std::uint64_t>();

  cfg.allow_low_s = get_bool(doc, "", "allow_low_s", false);

  // Cross-field consistency: the regularization must dominate s_min unless
  // the override flag is set.
  if (!cfg.allow_low_s) {
    const double bound = s_min(cfg.noise, cfg.model.n, cfg.model.c_f);
    if (cfg.model.reg_s < bound) {
      std::ostringstream msg;
      msg << "model.s: regularization " << cfg.model.reg_s
          << " is below s_min = " << bound
          << " for this noise; set allow_low_s to override";
      throw ConfigError(msg.str());
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config file not found: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

std::string constants_json(const RunConfig& cfg) {
  const GridD grid = cfg.grid();
  const double h = grid.spacing();
  nlohmann::json j{
      {"c_strat", c_strat(cfg.noise, cfg.model.n)},
      {"c_osc", cfg.model.oscillation_bound()},
      {"sigma", cutoff_sigma(h, cfg.model.p)},
      {"e_max_h", resolve_e_max(cfg.scheme, h, cfg.model)},
      {"s_min", s_min(cfg.noise, cfg.model.n, cfg.model.c_f)},
      {"s_opt", s_opt(cfg.noise, cfg.model.n)},
      {"noise_coloring_sum", cfg.noise.coloring_sum()},
  };
  return j.dump(2);
}

}  // namespace stfilm
