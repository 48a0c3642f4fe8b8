// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "gpdphs/app/config.hpp"
#include "gpdphs/app/csv.hpp"
#include "gpdphs/app/model_io.hpp"
#include "gpdphs/app/pipeline.hpp"
#include "gpdphs/error.hpp"

using namespace gpdphs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "gpdphs_app_test" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

app::ExperimentConfig small_config(const std::string& name) {
  app::ExperimentConfig c = app::default_config(11);
  c.output_dir = scratch(name).string();
  c.n_points = 31;
  c.sim.horizon = 0.05;
  c.train.n_samples = 40;
  c.train.n_starts = 2;
  c.control.eta_mode = "none";
  return c;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const auto c = app::default_config(5);
  const json j = app::to_json(c);
  EXPECT_EQ(j.at("seed"), 5);
  EXPECT_EQ(app::to_json(app::parse_config(j)), j);
  EXPECT_EQ(app::parse_config(json{{"seed", 5}}).swe.p_bar, 11.8);
}

TEST(Config, StrictParsing) {
  EXPECT_THROW(app::parse_config(json::object()), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"seed", 1}, {"bogus", 2}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"seed", 1}, {"swe", {{"dd", 0.1}}}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"seed", 1}, {"swe", {{"d", "big"}}}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"seed", 1}, {"grid", {{"n_points", -3}}}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"seed", 1}, {"swe", {{"d", -0.1}}}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"seed", 1}, {"control", {{"eta_mode", "maybe"}}}}), ConfigError);
  const auto c = app::parse_config(json{{"seed", 3}, {"swe", {{"d", 0.25}}}, {"sim", {{"horizon", 2.0}}}});
  EXPECT_EQ(c.swe.d, 0.25);
  EXPECT_EQ(c.sim.horizon, 2.0);
  EXPECT_EQ(c.swe.g, 9.81);
}

TEST(Config, LoadFromFile) {
  const fs::path dir = scratch("load");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"seed": 9, "swe": {"xi1": 2.5}})";
  const auto c = app::load_config((dir / "c.json").string());
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.swe.xi1, 2.5);
  std::ofstream(dir / "broken.json") << "{ seed: ";
  EXPECT_THROW(app::load_config((dir / "broken.json").string()), ConfigError);
  EXPECT_THROW(app::load_config((dir / "missing.json").string()), ConfigError);
}

TEST(Config, WithParameter) {
  const auto c = app::default_config(1);
  EXPECT_EQ(app::with_parameter(c, "swe.xi1", 3.0).swe.xi1, 3.0);
  EXPECT_EQ(app::with_parameter(c, "sim.dt", 5e-4).sim.dt, 5e-4);
  EXPECT_THROW(app::with_parameter(c, "swe.nothing", 1.0), ConfigError);
  EXPECT_THROW(app::with_parameter(c, "control.plant_model", 1.0), ConfigError);
}

TEST(Csv, ExactRoundTrip) {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  const std::vector<double> r1 = {0.1, 1.0 / 3.0, -2.5e-300}, r2 = {6.02214076e23, -0.0, 1e-17};
  {
    app::CsvWriter w((dir / "t.csv").string());
    w.comment("units: none");
    w.header({"a", "b", "c"});
    w.row(r1);
    w.row(r2);
    EXPECT_THROW(w.row(std::vector<double>{1.0}), DimensionError);
  }
  const auto t = app::read_csv((dir / "t.csv").string());
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(t.comments.size(), 1u);
  EXPECT_EQ(t.rows[0], r1);
  EXPECT_EQ(t.rows[1], r2);
}

TEST(ModelIo, RoundTripPredictsIdentically) {
  auto c = small_config("model");
  const auto tr = app::train_from_config(c);
  const fs::path dir = scratch("model_file");
  fs::create_directories(dir);
  app::save_model((dir / "m.json").string(), tr.model);
  const auto back = app::load_model((dir / "m.json").string());
  for (double q : {0.5, 2.0, 7.5}) {
    for (double p : {-8.0, 0.0, 3.3}) {
      const Eigen::Vector2d x(q, p);
      EXPECT_EQ(back.density(x), tr.model.density(x));
      EXPECT_EQ(back.gradient(x), tr.model.gradient(x));
    }
  }
  json j = app::model_to_json(tr.model);
  j["version"] = 99;
  EXPECT_THROW(app::model_from_json(j), ConfigError);
  json k = app::model_to_json(tr.model);
  k.erase("hyper");
  EXPECT_THROW(app::model_from_json(k), ConfigError);
}

TEST(Pipeline, SimulateWritesFilesAndIsDeterministic) {
  auto c = small_config("sim_a");
  c.sim.horizon = 0.01;
  std::ostringstream log;
  ASSERT_EQ(app::cmd_simulate(c, std::nullopt, log), 0);
  const fs::path a = c.output_dir;
  for (const char* f : {"config.json", "trajectory.csv", "energies.csv", "io.csv", "report.json"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  const auto traj = app::read_csv((a / "trajectory.csv").string());
  EXPECT_EQ(traj.rows.size(), 2u);
  EXPECT_EQ(traj.columns.front(), "t");
  EXPECT_EQ(traj.columns.size(), 1u + 2u * 31u);
  const auto en = app::read_csv((a / "energies.csv").string());
  EXPECT_EQ(en.columns, (std::vector<std::string>{"t", "H", "mu_H", "H_c", "H_d"}));
  EXPECT_EQ(read_json(a / "report.json").at("records"), 2);

  auto c2 = c;
  c2.output_dir = scratch("sim_b").string();
  ASSERT_EQ(app::cmd_simulate(c2, std::nullopt, log), 0);
  for (const char* f : {"trajectory.csv", "energies.csv", "io.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(fs::path(c2.output_dir) / f)) << f;
  }
}

TEST(Pipeline, TrainReportsImprovement) {
  auto c = small_config("train");
  std::ostringstream log;
  ASSERT_EQ(app::cmd_train(c, log), 0);
  const json r = read_json(fs::path(c.output_dir) / "report.json");
  EXPECT_GE(r.at("nlml_decrease").get<double>(), 0.0);
  EXPECT_LT(r.at("validation_rms_ratio").get<double>(), 1.0);
  EXPECT_EQ(r.at("roundtrip_max_abs_diff").get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "model.json"));
  EXPECT_EQ(app::read_csv((fs::path(c.output_dir) / "training_data.csv").string()).rows.size(), 40u);
}

TEST(Pipeline, VerifyPassesAndDetectsPerturbation) {
  auto c = small_config("verify");
  c.control.controller_model = "true";
  std::ostringstream log;
  EXPECT_EQ(app::cmd_verify(c, std::nullopt, log), 0) << log.str();
  EXPECT_TRUE(read_json(fs::path(c.output_dir) / "report.json").at("pass").get<bool>());

  auto bad = c;
  bad.output_dir = scratch("verify_bad").string();
  bad.control.perturb_g_c = 0.1;
  EXPECT_EQ(app::cmd_verify(bad, std::nullopt, log), 1);
  EXPECT_FALSE(read_json(fs::path(bad.output_dir) / "report.json").at("pass").get<bool>());

  auto frictionless = c;
  frictionless.output_dir = scratch("verify_d0").string();
  frictionless.swe.d = 0.0;
  EXPECT_EQ(app::cmd_verify(frictionless, std::nullopt, log), 0);
  EXPECT_TRUE(read_json(fs::path(frictionless.output_dir) / "report.json").at("s_is_zero").get<bool>());
}

TEST(Pipeline, ControlWithZeroGainsAppliesNoInput) {
  auto c = small_config("control_zero");
  c.control.controller_model = "true";
  c.swe.xi1 = c.swe.xi2 = 0.0;
  c.swe.q_bar = c.swe.p_bar = 0.0;
  c.sim.horizon = 0.003;
  c.sim.log_every = 1;
  std::ostringstream log;
  ASSERT_EQ(app::cmd_control(c, std::nullopt, log), 0) << log.str();
  const auto io = app::read_csv((fs::path(c.output_dir) / "io.csv").string());
  ASSERT_EQ(io.rows.size(), 4u);
  for (const auto& row : io.rows) {
    EXPECT_EQ(row[1], 0.0);
    EXPECT_EQ(row[2], 0.0);
  }
  EXPECT_EQ(read_json(fs::path(c.output_dir) / "report.json").at("max_abs_u").get<double>(), 0.0);
}

TEST(Pipeline, ControlWritesAuditSchema) {
  auto c = small_config("control");
  std::ostringstream log;
  ASSERT_EQ(app::cmd_control(c, std::nullopt, log), 0) << log.str();
  const fs::path out = c.output_dir;
  EXPECT_TRUE(fs::exists(out / "model.json"));
  const auto audit = app::read_csv((out / "audit.csv").string());
  EXPECT_EQ(audit.columns,
            (std::vector<std::string>{"t", "H", "mu_H", "H_c", "H_d", "C1", "C2", "uTy", "ybarTu", "prop3_bound",
                                      "dHd_dt", "prop3_bound_shaped"}));
  EXPECT_EQ(audit.rows.size(), 6u);
  const json r = read_json(out / "report.json");
  EXPECT_TRUE(r.at("distance_ratio").is_number());
  EXPECT_EQ(r.at("casimir_initial").size(), 2u);
}

TEST(Pipeline, SweepRunsEveryValue) {
  auto c = small_config("sweep");
  c.control.controller_model = "true";
  c.sim.horizon = 0.02;
  c.sweep.parameter = "swe.xi1";
  c.sweep.values = {0.5, 1.0, 2.0};
  c.sweep.threads = 2;
  std::ostringstream log;
  ASSERT_EQ(app::cmd_sweep(c, std::nullopt, log), 0) << log.str();
  const auto t = app::read_csv((fs::path(c.output_dir) / "sweep.csv").string());
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0][1], 0.5);
  EXPECT_EQ(t.rows[2][1], 2.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / ("run_" + std::to_string(i)) / "report.json"));
  }
}
