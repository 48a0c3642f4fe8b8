// SPDX-License-Identifier: Apache-2.0
//
// gpdphs <simulate|train|verify|control|sweep> [--config FILE] [--out DIR] [--seed N] [--model FILE]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gpdphs/app/config.hpp"
#include "gpdphs/app/pipeline.hpp"
#include "gpdphs/error.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string model;
};

void add_common(CLI::App* sub, Options& o, bool with_model) {
  sub->add_option("--config", o.config, "experiment config (JSON)");
  sub->add_option("--out", o.out, "output directory (overrides output_dir)");
  sub->add_option("--seed", o.seed, "random seed (overrides seed)");
  if (with_model) {
    sub->add_option("--model", o.model, "trained model file from 'train'");
  }
}

gpdphs::app::ExperimentConfig resolve(const Options& o) {
  gpdphs::app::ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = gpdphs::app::load_config(o.config);
  } else if (o.seed) {
    cfg = gpdphs::app::default_config(*o.seed);
  } else {
    throw gpdphs::ConfigError("a seed is mandatory: pass --config with a 'seed' key or --seed");
  }
  if (o.seed) {
    cfg.seed = *o.seed;
  }
  if (!o.out.empty()) {
    cfg.output_dir = o.out;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning and control of distributed port-Hamiltonian systems"};
  app.require_subcommand(1);
  Options o;
  CLI::App* simulate = app.add_subcommand("simulate", "open-loop simulation");
  CLI::App* train = app.add_subcommand("train", "train the Hamiltonian density GP");
  CLI::App* verify = app.add_subcommand("verify", "structural checks and eta_bar estimate");
  CLI::App* control = app.add_subcommand("control", "closed-loop run with the energy audit");
  CLI::App* sweep = app.add_subcommand("sweep", "parallel closed-loop runs over one parameter");
  add_common(simulate, o, true);
  add_common(train, o, false);
  add_common(verify, o, true);
  add_common(control, o, true);
  add_common(sweep, o, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const gpdphs::app::ExperimentConfig cfg = resolve(o);
    const std::optional<std::string> model = o.model.empty() ? std::nullopt : std::optional<std::string>(o.model);
    if (simulate->parsed()) return gpdphs::app::cmd_simulate(cfg, model, std::cout);
    if (train->parsed()) return gpdphs::app::cmd_train(cfg, std::cout);
    if (verify->parsed()) return gpdphs::app::cmd_verify(cfg, model, std::cout);
    if (control->parsed()) return gpdphs::app::cmd_control(cfg, model, std::cout);
    if (sweep->parsed()) return gpdphs::app::cmd_sweep(cfg, model, std::cout);
  } catch (const gpdphs::Error& e) {
    std::cerr << fmt::format("error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::cerr << fmt::format("internal error: {}\n", e.what());
    return 3;
  }
  return 0;
}
