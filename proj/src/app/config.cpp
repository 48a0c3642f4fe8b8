// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/app/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "gpdphs/error.hpp"

namespace gpdphs::app {

using nlohmann::json;

namespace {

// Every key of `input` must exist in `schema` with a compatible type.
void check_against(const json& input, const json& schema, const std::string& where) {
  if (!input.is_object()) {
    throw ConfigError(fmt::format("{}: expected an object", where.empty() ? "<root>" : where));
  }
  for (auto it = input.begin(); it != input.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!schema.contains(it.key())) {
      throw ConfigError(fmt::format("unknown config key '{}'", path));
    }
    const json& ref = schema.at(it.key());
    const json& val = it.value();
    if (ref.is_object()) {
      check_against(val, ref, path);
    } else if (ref.is_number()) {
      if (!val.is_number()) {
        throw ConfigError(fmt::format("config key '{}' must be a number", path));
      }
      const bool non_negative_integer =
          val.is_number_unsigned() || (val.is_number_integer() && val.get<std::int64_t>() >= 0);
      if (ref.is_number_unsigned() && !non_negative_integer) {
        throw ConfigError(fmt::format("config key '{}' must be a non-negative integer", path));
      }
      if (ref.is_number_integer() && !val.is_number_integer()) {
        throw ConfigError(fmt::format("config key '{}' must be an integer", path));
      }
    } else if (ref.is_boolean()) {
      if (!val.is_boolean()) {
        throw ConfigError(fmt::format("config key '{}' must be a boolean", path));
      }
    } else if (ref.is_string()) {
      if (!val.is_string()) {
        throw ConfigError(fmt::format("config key '{}' must be a string", path));
      }
    } else if (ref.is_array()) {
      if (!val.is_array()) {
        throw ConfigError(fmt::format("config key '{}' must be an array", path));
      }
      for (const auto& v : val) {
        if (!v.is_number()) {
          throw ConfigError(fmt::format("config key '{}' must hold numbers", path));
        }
      }
    }
  }
}

void merge_into(json& base, const json& over) {
  for (auto it = over.begin(); it != over.end(); ++it) {
    if (it.value().is_object() && base[it.key()].is_object()) {
      merge_into(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

void require_size(const std::vector<double>& v, std::size_t n, const char* key) {
  if (v.size() != n) {
    throw ConfigError(fmt::format("config key '{}' must have {} entries, got {}", key, n, v.size()));
  }
}

void require_range(const std::vector<double>& v, const char* key) {
  require_size(v, 2, key);
  if (!(v[0] < v[1])) {
    throw ConfigError(fmt::format("config key '{}' must be an increasing pair", key));
  }
}

void validate(const ExperimentConfig& c) {
  c.swe.validate();
  c.sim.validate();
  if (c.n_points < 3) {
    throw ConfigError("grid.n_points must be at least 3");
  }
  if (c.output_dir.empty()) {
    throw ConfigError("output_dir must not be empty");
  }
  if (!(c.initial.q0 > 0.0)) {
    throw ConfigError("initial.q0 must be positive");
  }
  require_size(c.simulate.u0, 2, "simulate.u0");
  require_size(c.simulate.amplitude, 2, "simulate.amplitude");
  require_range(c.train.q_range, "train.q_range");
  require_range(c.train.p_range, "train.p_range");
  if (c.train.kernel != "ard" && c.train.kernel != "isotropic") {
    throw ConfigError(fmt::format("train.kernel must be 'ard' or 'isotropic', got '{}'", c.train.kernel));
  }
  if (c.train.n_samples < 2) {
    throw ConfigError("train.n_samples must be at least 2");
  }
  if (!(c.train.sigma_f > 0.0) || !(c.train.length_scale > 0.0) || !(c.train.sigma_n > 0.0)) {
    throw ConfigError("train hyperparameter inits must be positive");
  }
  if (!(c.train.sigma_n_min > 0.0)) {
    throw ConfigError("train.sigma_n_min must be positive");
  }
  if (c.train.n_starts < 1) {
    throw ConfigError("train.n_starts must be at least 1");
  }
  if (c.train.validation_n < 2) {
    throw ConfigError("train.validation_n must be at least 2");
  }
  for (const auto* key : {&c.control.controller_model, &c.control.plant_model}) {
    if (*key != "learned" && *key != "true") {
      throw ConfigError(fmt::format("control models must be 'learned' or 'true', got '{}'", *key));
    }
  }
  if (!(c.control.confidence > 0.0 && c.control.confidence < 1.0)) {
    throw ConfigError("control.confidence must lie in (0, 1)");
  }
  if (!(c.control.epsilon >= 0.0)) {
    throw ConfigError("control.epsilon must be non-negative (0 selects lambda)");
  }
  if (c.control.eta_mode != "oracle" && c.control.eta_mode != "deployment" && c.control.eta_mode != "none") {
    throw ConfigError(fmt::format("control.eta_mode must be 'oracle', 'deployment' or 'none', got '{}'",
                                  c.control.eta_mode));
  }
  require_range(c.control.eta_q_range, "control.eta_q_range");
  require_range(c.control.eta_p_range, "control.eta_p_range");
  if (c.control.eta_levels < 2) {
    throw ConfigError("control.eta_levels must be at least 2");
  }
  if (!(c.control.audit_tolerance >= 0.0)) {
    throw ConfigError("control.audit_tolerance must be non-negative");
  }
  if (c.sweep.threads < 1) {
    throw ConfigError("sweep.threads must be at least 1");
  }
}

}  // namespace

ExperimentConfig default_config(std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["swe"] = {{"length_l", c.swe.length_l}, {"d", c.swe.d},         {"g", c.swe.g},
              {"delta_center", c.swe.delta_center}, {"q_bar", c.swe.q_bar}, {"p_bar", c.swe.p_bar},
              {"xi1", c.swe.xi1},   {"xi2", c.swe.xi2}};
  j["grid"] = {{"n_points", c.n_points}};
  j["sim"] = {{"dt", c.sim.dt},
              {"horizon", c.sim.horizon},
              {"log_every", c.sim.log_every},
              {"cfl_guard", c.sim.cfl_guard},
              {"cfl_check_every", c.sim.cfl_check_every}};
  j["initial"] = {{"q0", c.initial.q0}, {"p0", c.initial.p0}};
  j["simulate"] = {{"equilibrium_input", c.simulate.equilibrium_input},
                   {"u0", c.simulate.u0},
                   {"amplitude", c.simulate.amplitude},
                   {"frequency", c.simulate.frequency}};
  j["train"] = {{"n_samples", c.train.n_samples},     {"q_range", c.train.q_range},
                {"p_range", c.train.p_range},         {"kernel", c.train.kernel},
                {"sigma_f", c.train.sigma_f},         {"length_scale", c.train.length_scale},
                {"sigma_n", c.train.sigma_n},         {"sigma_n_min", c.train.sigma_n_min},
                {"optimize", c.train.optimize},       {"n_starts", c.train.n_starts},
                {"validation_n", c.train.validation_n}, {"include_delta", c.train.include_delta}};
  j["control"] = {{"controller_model", c.control.controller_model},
                  {"plant_model", c.control.plant_model},
                  {"confidence", c.control.confidence},
                  {"epsilon", c.control.epsilon},
                  {"eta_mode", c.control.eta_mode},
                  {"eta_q_range", c.control.eta_q_range},
                  {"eta_p_range", c.control.eta_p_range},
                  {"eta_levels", c.control.eta_levels},
                  {"perturb_g_c", c.control.perturb_g_c},
                  {"audit_tolerance", c.control.audit_tolerance}};
  j["sweep"] = {{"parameter", c.sweep.parameter}, {"values", c.sweep.values}, {"threads", c.sweep.threads}};
  return j;
}

ExperimentConfig parse_config(const json& input) {
  const json schema = to_json(ExperimentConfig{});
  check_against(input, schema, "");
  if (!input.contains("seed")) {
    throw ConfigError("config key 'seed' is mandatory");
  }
  json m = schema;
  merge_into(m, input);

  ExperimentConfig c;
  c.seed = m.at("seed").get<std::uint64_t>();
  c.output_dir = m.at("output_dir").get<std::string>();
  const json& s = m.at("swe");
  c.swe.length_l = s.at("length_l").get<double>();
  c.swe.d = s.at("d").get<double>();
  c.swe.g = s.at("g").get<double>();
  c.swe.delta_center = s.at("delta_center").get<double>();
  c.swe.q_bar = s.at("q_bar").get<double>();
  c.swe.p_bar = s.at("p_bar").get<double>();
  c.swe.xi1 = s.at("xi1").get<double>();
  c.swe.xi2 = s.at("xi2").get<double>();
  c.n_points = m.at("grid").at("n_points").get<std::size_t>();
  const json& sm = m.at("sim");
  c.sim.dt = sm.at("dt").get<double>();
  c.sim.horizon = sm.at("horizon").get<double>();
  c.sim.log_every = sm.at("log_every").get<std::size_t>();
  c.sim.cfl_guard = sm.at("cfl_guard").get<double>();
  c.sim.cfl_check_every = sm.at("cfl_check_every").get<std::size_t>();
  c.initial.q0 = m.at("initial").at("q0").get<double>();
  c.initial.p0 = m.at("initial").at("p0").get<double>();
  const json& si = m.at("simulate");
  c.simulate.equilibrium_input = si.at("equilibrium_input").get<bool>();
  c.simulate.u0 = si.at("u0").get<std::vector<double>>();
  c.simulate.amplitude = si.at("amplitude").get<std::vector<double>>();
  c.simulate.frequency = si.at("frequency").get<double>();
  const json& t = m.at("train");
  c.train.n_samples = t.at("n_samples").get<std::size_t>();
  c.train.q_range = t.at("q_range").get<std::vector<double>>();
  c.train.p_range = t.at("p_range").get<std::vector<double>>();
  c.train.kernel = t.at("kernel").get<std::string>();
  c.train.sigma_f = t.at("sigma_f").get<double>();
  c.train.length_scale = t.at("length_scale").get<double>();
  c.train.sigma_n = t.at("sigma_n").get<double>();
  c.train.sigma_n_min = t.at("sigma_n_min").get<double>();
  c.train.optimize = t.at("optimize").get<bool>();
  c.train.n_starts = t.at("n_starts").get<int>();
  c.train.validation_n = t.at("validation_n").get<std::size_t>();
  c.train.include_delta = t.at("include_delta").get<bool>();
  const json& ct = m.at("control");
  c.control.controller_model = ct.at("controller_model").get<std::string>();
  c.control.plant_model = ct.at("plant_model").get<std::string>();
  c.control.confidence = ct.at("confidence").get<double>();
  c.control.epsilon = ct.at("epsilon").get<double>();
  c.control.eta_mode = ct.at("eta_mode").get<std::string>();
  c.control.eta_q_range = ct.at("eta_q_range").get<std::vector<double>>();
  c.control.eta_p_range = ct.at("eta_p_range").get<std::vector<double>>();
  c.control.eta_levels = ct.at("eta_levels").get<std::size_t>();
  c.control.perturb_g_c = ct.at("perturb_g_c").get<double>();
  c.control.audit_tolerance = ct.at("audit_tolerance").get<double>();
  const json& sw = m.at("sweep");
  c.sweep.parameter = sw.at("parameter").get<std::string>();
  c.sweep.values = sw.at("values").get<std::vector<double>>();
  c.sweep.threads = sw.at("threads").get<std::size_t>();
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot open config file '{}'", path));
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config file '{}': {}", path, e.what()));
  }
  return parse_config(j);
}

ExperimentConfig with_parameter(const ExperimentConfig& c, const std::string& dotted, double value) {
  json j = to_json(c);
  std::string pointer = "/" + dotted;
  for (auto& ch : pointer) {
    if (ch == '.') {
      ch = '/';
    }
  }
  const json::json_pointer ptr(pointer);
  if (!j.contains(ptr) || !j.at(ptr).is_number()) {
    throw ConfigError(fmt::format("sweep parameter '{}' is not a numeric config key", dotted));
  }
  if (j.at(ptr).is_number_unsigned()) {
    if (!(value >= 0.0) || value != static_cast<double>(static_cast<std::uint64_t>(value))) {
      throw ConfigError(fmt::format("sweep parameter '{}' takes non-negative integers, got {}", dotted, value));
    }
    j[ptr] = static_cast<std::uint64_t>(value);
  } else if (j.at(ptr).is_number_integer()) {
    j[ptr] = static_cast<std::int64_t>(value);
  } else {
    j[ptr] = value;
  }
  return parse_config(j);
}

}  // namespace gpdphs::app
