// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpdphs/sim/simulator.hpp"
#include "gpdphs/swe/swe.hpp"

namespace gpdphs::app {

struct InitialConfig {
  double q0 = 1.0;
  double p0 = 0.0;
};

/// Open-loop excitation: u(t) = u0 + amplitude * sin(2 pi frequency t).
/// With `equilibrium_input` the base value is the equilibrium boundary input.
struct SimulateConfig {
  bool equilibrium_input = true;
  std::vector<double> u0 = {0.0, 0.0};
  std::vector<double> amplitude = {0.0, 0.0};
  double frequency = 0.5;
};

struct TrainConfig {
  std::size_t n_samples = 100;
  std::vector<double> q_range = {0.0, 10.0};
  std::vector<double> p_range = {-10.0, 10.0};
  std::string kernel = "ard";  // "ard" or "isotropic"
  double sigma_f = 1.0;
  double length_scale = 1.0;
  double sigma_n = 1e-4;
  double sigma_n_min = 1e-4;
  bool optimize = true;
  int n_starts = 8;
  std::size_t validation_n = 50;
  bool include_delta = true;
};

struct ControlConfig {
  std::string controller_model = "learned";  // "learned" or "true"
  std::string plant_model = "true";          // "learned" or "true"
  double confidence = 0.95;
  double epsilon = 0.0;  // 0 selects lambda
  std::string eta_mode = "oracle";  // "oracle", "deployment" or "none"
  std::vector<double> eta_q_range = {0.5, 3.0};
  std::vector<double> eta_p_range = {-2.0, 2.0};
  std::size_t eta_levels = 6;
  double perturb_g_c = 0.0;
  double audit_tolerance = 1e-6;
};

struct SweepConfig {
  std::string parameter = "swe.xi1";
  std::vector<double> values;
  std::size_t threads = 1;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  swe::SweParams swe;
  std::size_t n_points = 101;
  sim::SimConfig sim;
  InitialConfig initial;
  SimulateConfig simulate;
  TrainConfig train;
  ControlConfig control;
  SweepConfig sweep;
};

/// Strict parse: unknown keys, wrong types and a missing seed raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
/// Fully resolved document (every field present).
nlohmann::json to_json(const ExperimentConfig& c);

/// ExperimentConfig with defaults and the given seed.
ExperimentConfig default_config(std::uint64_t seed);

/// Sets a dotted numeric parameter (e.g. "swe.xi1") on the resolved document.
ExperimentConfig with_parameter(const ExperimentConfig& c, const std::string& dotted, double value);

}  // namespace gpdphs::app
