// SPDX-License-Identifier: Apache-2.0
//
// Subcommands. Each writes its outputs plus the resolved config.json into
// cfg.output_dir and returns a process exit code:
//   0  success
//   1  a verification check failed (verify only)
//   2  at least one sweep run raised an error (sweep only)
// Module errors propagate as gpdphs::Error.

#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "gpdphs/app/config.hpp"
#include "gpdphs/learn/hamiltonian.hpp"

namespace gpdphs::app {

/// Open-loop run: trajectory.csv, energies.csv, io.csv, report.json.
int cmd_simulate(const ExperimentConfig& cfg, const std::optional<std::string>& model_path, std::ostream& log);

/// Density GP training: model.json, training_data.csv, report.json.
int cmd_train(const ExperimentConfig& cfg, std::ostream& log);

/// Structural checks and eta_bar: report.json.
int cmd_verify(const ExperimentConfig& cfg, const std::optional<std::string>& model_path, std::ostream& log);

/// Closed-loop run: trajectory.csv, energies.csv, audit.csv, io.csv, report.json.
int cmd_control(const ExperimentConfig& cfg, const std::optional<std::string>& model_path, std::ostream& log);

/// cmd_control for every value of cfg.sweep.parameter, run on cfg.sweep.threads
/// workers into output_dir/run_<i>; summary in sweep.csv.
int cmd_sweep(const ExperimentConfig& cfg, const std::optional<std::string>& model_path, std::ostream& log);

/// Trains the density GP described by cfg.train (deterministic in cfg.seed).
learn::TrainResult train_from_config(const ExperimentConfig& cfg);

}  // namespace gpdphs::app
