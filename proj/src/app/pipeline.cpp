// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/app/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "gpdphs/app/csv.hpp"
#include "gpdphs/app/model_io.hpp"
#include "gpdphs/control/casimir.hpp"
#include "gpdphs/control/passive_output.hpp"
#include "gpdphs/control/robustness.hpp"
#include "gpdphs/error.hpp"
#include "gpdphs/learn/eta_bar.hpp"
#include "gpdphs/sim/simulator.hpp"
#include "gpdphs/swe/closed_loop.hpp"
#include "gpdphs/swe/swe.hpp"

namespace gpdphs::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string prepare_output(const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) {
    throw Error(fmt::format("cannot create output directory '{}': {}", cfg.output_dir, ec.message()));
  }
  std::ofstream out(fs::path(cfg.output_dir) / "config.json", std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(fmt::format("cannot write config.json in '{}'", cfg.output_dir));
  }
  out << to_json(cfg).dump(2) << '\n';
  return cfg.output_dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(fmt::format("cannot write '{}'", path.string()));
  }
  out << j.dump(2) << '\n';
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      r.push_back(m(i, k));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

bool needs_model(const ExperimentConfig& cfg) {
  return cfg.control.controller_model == "learned" || cfg.control.plant_model == "learned";
}

std::shared_ptr<const learn::LearnedHamiltonian> obtain_model(const ExperimentConfig& cfg,
                                                              const std::optional<std::string>& model_path,
                                                              std::ostream& log) {
  if (model_path) {
    log << fmt::format("loading model {}\n", *model_path);
    return std::make_shared<learn::LearnedHamiltonian>(load_model(*model_path));
  }
  log << "no --model given, training the density GP from the config\n";
  auto lh = std::make_shared<learn::LearnedHamiltonian>(train_from_config(cfg).model);
  save_model((fs::path(cfg.output_dir) / "model.json").string(), *lh);
  return lh;
}

learn::DomainBox eta_box(const ExperimentConfig& cfg) {
  return learn::DomainBox{Eigen::Vector2d(cfg.control.eta_q_range[0], cfg.control.eta_p_range[0]),
                          Eigen::Vector2d(cfg.control.eta_q_range[1], cfg.control.eta_p_range[1])};
}

std::optional<learn::UncertaintyBound> estimate_eta(const ExperimentConfig& cfg, const learn::LearnedHamiltonian& lh,
                                                    const core::DensityModel& truth,
                                                    const core::StructureMatrices& s,
                                                    const core::SpatialGrid& grid) {
  if (cfg.control.eta_mode == "oracle") {
    learn::OracleSweepOptions o;
    o.levels = cfg.control.eta_levels;
    return learn::estimate_eta_bar_oracle(lh, truth, s, grid, eta_box(cfg), cfg.control.confidence, o);
  }
  if (cfg.control.eta_mode == "deployment") {
    learn::DeploymentOptions o;
    o.seed = cfg.seed;
    return learn::estimate_eta_bar_deployment(lh, s, grid, eta_box(cfg), cfg.control.confidence, o);
  }
  return std::nullopt;
}

json eta_json(const std::optional<learn::UncertaintyBound>& eb) {
  if (!eb) {
    return json(nullptr);
  }
  return {{"eta_bar", eb->eta_bar},
          {"mode", eb->mode},
          {"confidence", eb->confidence},
          {"raw_max", eb->raw_max},
          {"fields_evaluated", eb->fields_evaluated},
          {"domain_lower", std::vector<double>(eb->domain_box.lower.data(),
                                               eb->domain_box.lower.data() + eb->domain_box.lower.size())},
          {"domain_upper", std::vector<double>(eb->domain_box.upper.data(),
                                               eb->domain_box.upper.data() + eb->domain_box.upper.size())}};
}

std::vector<std::string> state_columns(const core::SpatialGrid& grid) {
  std::vector<std::string> cols{"t"};
  for (std::size_t j = 0; j < grid.n_points(); ++j) {
    cols.push_back(fmt::format("q_{}", j));
    cols.push_back(fmt::format("p_{}", j));
  }
  return cols;
}

void write_trajectory(const fs::path& path, const core::SpatialGrid& grid, const std::vector<double>& times,
                      const std::vector<Eigen::MatrixXd>& states) {
  CsvWriter w(path.string());
  w.comment("gpdphs trajectory v1");
  w.comment("t [s]; q_j water level [m] and p_j momentum variable [m/s] at node z_j, z-major");
  w.comment(fmt::format("grid: a = {}, b = {}, n_points = {}, z_j = a + j (b - a) / (n_points - 1) [m]",
                        format_double(grid.a()), format_double(grid.b()), grid.n_points()));
  w.header(state_columns(grid));
  std::vector<double> row;
  for (std::size_t k = 0; k < times.size(); ++k) {
    row.assign(1, times[k]);
    const Eigen::MatrixXd& x = states[k];
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        row.push_back(x(j, c));
      }
    }
    w.row(row);
  }
}

void write_energies_header(CsvWriter& w) {
  w.comment("gpdphs energies v1");
  w.comment("t [s]; H true energy, mu_H model energy, H_c controller energy, H_d = mu_H + H_c, all [m^4/s^2]");
  w.header({"t", "H", "mu_H", "H_c", "H_d"});
}

}  // namespace

learn::TrainResult train_from_config(const ExperimentConfig& cfg) {
  const TrainConfig& t = cfg.train;
  const Eigen::Vector2d lo(t.q_range[0], t.p_range[0]);
  const Eigen::Vector2d hi(t.q_range[1], t.p_range[1]);
  const Eigen::MatrixXd samples = swe::density_samples(cfg.swe, t.n_samples, lo, hi, cfg.seed, t.include_delta);
  const gp::Hyperparams h = t.kernel == "ard"
                                ? gp::Hyperparams::ard(t.sigma_f, Eigen::Vector2d::Constant(t.length_scale), t.sigma_n)
                                : gp::Hyperparams::isotropic(t.sigma_f, t.length_scale, t.sigma_n);
  learn::TrainOptions opts;
  opts.optimize = t.optimize;
  opts.optimizer.search.n_starts = t.n_starts;
  opts.optimizer.search.seed = cfg.seed;
  opts.optimizer.bounds.sigma_n_min = t.sigma_n_min;
  return learn::train_hamiltonian_direct(samples, swe::prior_mean(cfg.swe.g), swe::prior_descriptor(cfg.swe.g), h,
                                         opts);
}

int cmd_simulate(const ExperimentConfig& cfg, const std::optional<std::string>& model_path, std::ostream& log) {
  const fs::path out = prepare_output(cfg);
  const swe::SweParams& params = cfg.swe;
  const core::SpatialGrid grid = swe::grid(params, cfg.n_points);
  const core::StructureMatrices s = swe::structure(params);
  auto truth = std::make_shared<const swe::SweDensity>(params);

  std::shared_ptr<const core::DensityModel> model = truth;
  if (model_path || cfg.control.plant_model == "learned") {
    model = obtain_model(cfg, model_path, log);
  }
  std::shared_ptr<const core::DensityModel> plant_density = cfg.control.plant_model == "learned" ? model : truth;

  Eigen::VectorXd base(2);
  if (cfg.simulate.equilibrium_input) {
    base = swe::equilibrium_profile(params, grid, *truth).boundary_input;
  } else {
    base << cfg.simulate.u0[0], cfg.simulate.u0[1];
  }
  const Eigen::Vector2d amp(cfg.simulate.amplitude[0], cfg.simulate.amplitude[1]);
  const double freq = cfg.simulate.frequency;
  const sim::InputSignal input = [base, amp, freq](double t) -> Eigen::VectorXd {
    return base + amp * std::sin(2.0 * std::numbers::pi * freq * t);
  };

  sim::Plant plant{s, grid, plant_density, sim::BoundaryCoupling(s, swe::control_inputs()), 0, 1e-6};
  const core::StateField x0 = swe::uniform_state(grid, cfg.initial.q0, cfg.initial.p0);
  log << fmt::format("simulate: {} steps of {} s on {} nodes\n", cfg.sim.n_steps(), format_double(cfg.sim.dt),
                     grid.n_points());
  const sim::OpenLoopTrajectory traj = sim::simulate_open_loop(plant, x0, input, cfg.sim);

  write_trajectory(out / "trajectory.csv", grid, traj.times, traj.states);
  std::vector<double> h_true(traj.times.size());
  {
    CsvWriter w((out / "energies.csv").string());
    write_energies_header(w);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const core::StateField x(grid, traj.states[k]);
      h_true[k] = core::hamiltonian(*truth, x);
      const double mu = core::hamiltonian(*model, x);
      const double row[] = {traj.times[k], h_true[k], mu, 0.0, mu};
      w.row(row);
    }
  }
  {
    CsvWriter w((out / "io.csv").string());
    w.comment("gpdphs io v1");
    w.comment("t [s]; u1 = Q(0) [m^2/s], u2 = P(L) [m^2/s^2]; y1 = P(0) [m^2/s^2], y2 = -Q(L) [m^2/s]");
    w.header({"t", "u1", "u2", "y1", "y2"});
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const double row[] = {traj.times[k], traj.u[k](0), traj.u[k](1), traj.y[k](0), traj.y[k](1)};
      w.row(row);
    }
  }
  json report;
  report["command"] = "simulate";
  report["records"] = traj.times.size();
  report["steps"] = cfg.sim.n_steps();
  report["h_initial"] = h_true.front();
  report["h_final"] = h_true.back();
  report["h_relative_change"] = (h_true.back() - h_true.front()) / std::abs(h_true.front());
  report["max_balance_residual"] = traj.max_balance_residual;
  report["max_cfl"] = traj.max_cfl;
  report["input_base"] = std::vector<double>{base(0), base(1)};
  write_json(out / "report.json", report);
  log << fmt::format("H: {:.6g} -> {:.6g}, max balance residual {:.3e}, peak CFL {:.3f}\n", h_true.front(),
                     h_true.back(), traj.max_balance_residual, traj.max_cfl);
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
  const fs::path out = prepare_output(cfg);
  const TrainConfig& t = cfg.train;
  log << fmt::format("train: {} samples, {} kernel, {} starts\n", t.n_samples, t.kernel, t.n_starts);
  const learn::TrainResult tr = train_from_config(cfg);
  const learn::LearnedHamiltonian& lh = tr.model;
  const fs::path model_file = out / "model.json";
  save_model(model_file.string(), lh);

  {
    CsvWriter w((out / "training_data.csv").string());
    w.comment("gpdphs training data v1");
    w.comment("q [m], p [m/s], h density value [m^3/s^2]");
    w.header({"q", "p", "h"});
    for (Eigen::Index i = 0; i < lh.gp().inputs().rows(); ++i) {
      const double row[] = {lh.gp().inputs()(i, 0), lh.gp().inputs()(i, 1), lh.gp().targets()(i)};
      w.row(row);
    }
  }

  const Eigen::Vector2d lo(t.q_range[0], t.p_range[0]);
  const Eigen::Vector2d hi(t.q_range[1], t.p_range[1]);
  const swe::SweDensity truth(cfg.swe, t.include_delta);
  const swe::SweDensity prior_only(cfg.swe, false);
  const double rms = swe::density_rms_error(lh, truth, lo, hi, t.validation_n);
  const double prior_rms = swe::density_rms_error(prior_only, truth, lo, hi, t.validation_n);

  const learn::LearnedHamiltonian reloaded = load_model(model_file.string());
  double roundtrip = 0.0;
  for (std::size_t i = 0; i < t.validation_n; ++i) {
    for (std::size_t k = 0; k < t.validation_n; ++k) {
      const double a = static_cast<double>(i) / static_cast<double>(t.validation_n - 1);
      const double b = static_cast<double>(k) / static_cast<double>(t.validation_n - 1);
      const Eigen::Vector2d x(lo(0) + a * (hi(0) - lo(0)), lo(1) + b * (hi(1) - lo(1)));
      roundtrip = std::max(roundtrip, std::abs(lh.density(x) - reloaded.density(x)));
      roundtrip = std::max(roundtrip, (lh.gradient(x) - reloaded.gradient(x)).cwiseAbs().maxCoeff());
    }
  }

  const gp::Hyperparams& h = lh.gp().hyper();
  json report;
  report["command"] = "train";
  report["n_samples"] = t.n_samples;
  report["nlml_init"] = tr.nlml_init;
  report["nlml_final"] = tr.nlml_final;
  report["nlml_decrease"] = tr.nlml_init - tr.nlml_final;
  report["hyper"] = {{"sigma_f", h.sigma_f},
                     {"length_scales", std::vector<double>(h.length_scales.data(),
                                                           h.length_scales.data() + h.length_scales.size())},
                     {"sigma_n", h.sigma_n}};
  report["validation_grid"] = t.validation_n;
  report["validation_rms"] = rms;
  report["prior_only_rms"] = prior_rms;
  report["validation_rms_ratio"] = prior_rms > 0.0 ? json(rms / prior_rms) : json(nullptr);
  report["roundtrip_max_abs_diff"] = roundtrip;
  report["model_file"] = "model.json";
  write_json(out / "report.json", report);
  log << fmt::format("NLML {:.6g} -> {:.6g}; validation RMS {:.3e} (prior only {:.3e}); round trip {:.1e}\n",
                     tr.nlml_init, tr.nlml_final, rms, prior_rms, roundtrip);
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg, const std::optional<std::string>& model_path, std::ostream& log) {
  const fs::path out = prepare_output(cfg);
  const swe::SweParams& params = cfg.swe;
  params.validate();
  const core::SpatialGrid grid = swe::grid(params, cfg.n_points);
  const core::StructureMatrices s = swe::structure(params);
  const control::CasimirSpec cs = swe::casimirs(params, grid);

  Eigen::MatrixXd j_c(2, 2);
  j_c << 0.0, 1.0, -1.0, 0.0;
  const control::QuadraticHc hc{Eigen::Vector2d(params.xi1, params.xi2), Eigen::Vector2d::Zero(),
                                Eigen::Vector2d(params.q_bar, params.p_bar)};
  const control::ControllerPhs nominal(j_c, Eigen::MatrixXd::Identity(2, 2), hc, Eigen::Vector2d::Zero());
  const control::PassiveOutputConfig poc = control::compute_S(cs, nominal, s, grid, Eigen::MatrixXd::Zero(2, 2));
  const control::ControllerPhs checked =
      nominal.with_g_c(Eigen::MatrixXd::Identity(2, 2) * (1.0 + cfg.control.perturb_g_c));

  const sim::BoundaryCoupling coupling(s, swe::control_inputs());
  const control::CasimirPdeReport pde = control::check_casimir_pde(cs, s, grid);
  const control::MatchingReport matching = control::check_matching_conditions(cs, checked, poc, s, coupling.io());
  const core::IoValidationReport io = core::validate_io_matrices(coupling.io());

  std::optional<learn::UncertaintyBound> eb;
  if (cfg.control.eta_mode != "none" && (model_path || cfg.control.controller_model == "learned")) {
    const auto lh = obtain_model(cfg, model_path, log);
    eb = estimate_eta(cfg, *lh, swe::SweDensity(params), s, grid);
  }
  const double lambda = control::coercivity_on_range(s);

  const bool pass = pde.pass && matching.pass && io.pass;
  json report;
  report["command"] = "verify";
  report["casimir_pde"] = {{"residuals", pde.residuals},
                           {"max_residual", pde.max_residual},
                           {"tolerance", control::kCasimirPdeTolerance},
                           {"pass", pde.pass}};
  report["matching"] = {{"residual_dynamics", matching.residual_dynamics},
                        {"residual_input", matching.residual_input},
                        {"tolerance", control::kMatchingTolerance},
                        {"perturb_g_c", cfg.control.perturb_g_c},
                        {"pass", matching.pass}};
  report["io"] = {{"w_sigma_w", io.w_sigma_w},
                  {"w_sigma_wt_minus_i", io.w_sigma_wt_minus_i},
                  {"wt_sigma_wt", io.wt_sigma_wt},
                  {"rank_w", io.rank_w},
                  {"rank_w_tilde", io.rank_w_tilde},
                  {"stacked_min_singular", io.stacked_min_singular},
                  {"tolerance", core::kIoTolerance},
                  {"pass", io.pass}};
  report["s_matrix"] = matrix_json(poc.s_matrix);
  report["s_is_zero"] = poc.s_matrix.cwiseAbs().maxCoeff() == 0.0;
  report["lambda"] = lambda;
  if (lambda > 0.0) {
    const control::RobustnessLedger led = control::make_ledger(
        s, eb ? eb->eta_bar : 0.0, cfg.control.confidence,
        cfg.control.epsilon > 0.0 ? std::optional<double>(cfg.control.epsilon) : std::nullopt);
    report["ledger"] = {{"lambda", led.lambda},
                        {"epsilon", led.epsilon},
                        {"eta_bar", led.eta_bar},
                        {"confidence", led.confidence},
                        {"decrement_coeff", led.decrement_coeff()},
                        {"offset", led.offset()}};
  } else {
    report["ledger"] = nullptr;
  }
  report["eta_bar"] = eta_json(eb);
  report["pass"] = pass;
  write_json(out / "report.json", report);

  const auto tag = [](bool ok) { return ok ? "PASS" : "FAIL"; };
  log << fmt::format("{} casimir_pde max residual {:.3e} (tol {:.0e})\n", tag(pde.pass), pde.max_residual,
                     control::kCasimirPdeTolerance);
  log << fmt::format("{} matching residuals dynamics {:.3e}, input {:.3e} (tol {:.0e})\n", tag(matching.pass),
                     matching.residual_dynamics, matching.residual_input, control::kMatchingTolerance);
  log << fmt::format("{} io matrices |W S W^T| {:.1e}, |W S Wt^T - I| {:.1e}, |Wt S Wt^T| {:.1e}\n", tag(io.pass),
                     io.w_sigma_w, io.w_sigma_wt_minus_i, io.wt_sigma_wt);
  log << fmt::format("S = [[{}, {}], [{}, {}]]\n", format_double(poc.s_matrix(0, 0)),
                     format_double(poc.s_matrix(0, 1)), format_double(poc.s_matrix(1, 0)),
                     format_double(poc.s_matrix(1, 1)));
  if (eb) {
    log << fmt::format("eta_bar {:.6g} ({} mode, confidence {})\n", eb->eta_bar, eb->mode, eb->confidence);
  }
  return pass ? 0 : 1;
}

namespace {

struct ControlSummary {
  double distance_ratio = kNaN;
  double max_hd_increment_rel = kNaN;
  double c1_drift_rel = kNaN;
  double c2_drift_rel = kNaN;
  double audit_pass_fraction = kNaN;
  double max_abs_u = kNaN;
};

ControlSummary run_control(const ExperimentConfig& cfg, const std::optional<std::string>& model_path,
                           std::ostream& log) {
  const fs::path out = prepare_output(cfg);
  const swe::SweParams& params = cfg.swe;
  const core::SpatialGrid grid = swe::grid(params, cfg.n_points);
  const core::StructureMatrices s = swe::structure(params);
  auto truth = std::make_shared<const swe::SweDensity>(params);

  std::shared_ptr<const learn::LearnedHamiltonian> lh;
  if (needs_model(cfg)) {
    lh = obtain_model(cfg, model_path, log);
  }
  std::shared_ptr<const core::DensityModel> plant_density = truth;
  std::shared_ptr<const core::DensityModel> controller_density = truth;
  if (cfg.control.plant_model == "learned") {
    plant_density = lh;
  }
  if (cfg.control.controller_model == "learned") {
    controller_density = lh;
  }

  std::optional<learn::UncertaintyBound> eb;
  if (lh && cfg.control.controller_model == "learned") {
    eb = estimate_eta(cfg, *lh, *truth, s, grid);
  }
  swe::WiringOptions wo;
  wo.eta_bar = eb ? eb->eta_bar : 0.0;
  wo.confidence = cfg.control.confidence;
  if (cfg.control.epsilon > 0.0) {
    wo.epsilon = cfg.control.epsilon;
  }
  const swe::SweClosedLoop cl = swe::build_swe_closed_loop(params, grid, plant_density, controller_density, truth, wo);

  const core::StateField x0 = swe::uniform_state(grid, cfg.initial.q0, cfg.initial.p0);
  const Eigen::VectorXd xc0 = swe::zero_casimir_controller_state(cl.system.casimirs, x0);
  log << fmt::format("control: plant {}, controller {}, eta_bar {:.6g}, {} steps\n", cfg.control.plant_model,
                     cfg.control.controller_model, wo.eta_bar, cfg.sim.n_steps());
  const sim::Trajectory traj = sim::simulate_closed_loop(cl.system, cfg.sim, x0, xc0);

  write_trajectory(out / "trajectory.csv", grid, traj.times, traj.states);
  {
    CsvWriter w((out / "energies.csv").string());
    write_energies_header(w);
    for (const sim::AuditRow& r : traj.audit) {
      const double row[] = {r.t, r.h, r.mu_h, r.h_c, r.h_d};
      w.row(row);
    }
  }
  const double tol = cfg.control.audit_tolerance;
  std::size_t literal_ok = 0;
  std::size_t shaped_ok = 0;
  {
    CsvWriter w((out / "audit.csv").string());
    w.comment("gpdphs audit v1");
    w.comment("t [s]; H, mu_H, H_c, H_d [m^4/s^2]; C1, C2 Casimir values [m^2/s, m^2]");
    w.comment("uTy = u^T y, ybarTu = ybar^T u, prop3_bound, dHd_dt, prop3_bound_shaped [m^4/s^3]");
    w.comment("prop3_bound uses e = dmu/dx; prop3_bound_shaped uses the co-energy of H_d on the Casimir leaf");
    w.header({"t", "H", "mu_H", "H_c", "H_d", "C1", "C2", "uTy", "ybarTu", "prop3_bound", "dHd_dt",
              "prop3_bound_shaped"});
    for (const sim::AuditRow& r : traj.audit) {
      const double row[] = {r.t,         r.h,           r.mu_h,       r.h_c,       r.h_d,
                            r.casimirs(0), r.casimirs(1), r.u_t_y,      r.ybar_t_u,  r.prop3_bound,
                            r.dhd_dt,    r.prop3_bound_shaped};
      w.row(row);
      literal_ok += r.dhd_dt <= r.prop3_bound + tol ? 1 : 0;
      shaped_ok += r.dhd_dt <= r.prop3_bound_shaped + tol ? 1 : 0;
    }
  }
  double max_abs_u = 0.0;
  {
    CsvWriter w((out / "io.csv").string());
    w.comment("gpdphs io v1");
    w.comment("t [s]; u1 = Q(0) [m^2/s], u2 = P(L) [m^2/s^2]; y1 = P(0), y2 = -Q(L); ybar passive output;");
    w.comment("xc1, xc2 controller state");
    w.header({"t", "u1", "u2", "y1", "y2", "ybar1", "ybar2", "xc1", "xc2"});
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const double row[] = {traj.times[k],    traj.u[k](0),    traj.u[k](1),
                            traj.y[k](0),     traj.y[k](1),    traj.ybar[k](0),
                            traj.ybar[k](1),  traj.controller_states[k](0), traj.controller_states[k](1)};
      w.row(row);
      max_abs_u = std::max(max_abs_u, traj.u[k].cwiseAbs().maxCoeff());
    }
  }

  const double d0 = cl.equilibrium ? swe::l2_distance(x0, cl.equilibrium->state) : kNaN;
  const double d_t =
      cl.equilibrium ? swe::l2_distance(core::StateField(grid, traj.states.back()), cl.equilibrium->state) : kNaN;
  const sim::AuditRow& first = traj.audit.front();
  const sim::AuditRow& last = traj.audit.back();
  const Eigen::VectorXd psi0 = control::psi_values(cl.system.casimirs, x0);
  const Eigen::VectorXd gx0 = cl.system.casimirs.gamma().transpose() * xc0;
  const Eigen::VectorXd scale = psi0.cwiseAbs() + gx0.cwiseAbs();
  const Eigen::VectorXd drift = (last.casimirs - first.casimirs).cwiseAbs();
  Eigen::VectorXd drift_rel(drift.size());
  for (Eigen::Index i = 0; i < drift.size(); ++i) {
    drift_rel(i) = scale(i) > 0.0 ? drift(i) / scale(i) : drift(i);
  }

  // H_d(t) <= H_d(0) + integral of the audited bound, trapezoid over log rows.
  double integral = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < traj.audit.size(); ++k) {
    const auto& a = traj.audit[k - 1];
    const auto& b = traj.audit[k];
    integral += 0.5 * (a.prop3_bound + b.prop3_bound) * (b.t - a.t);
    worst_excess = std::max(worst_excess, (b.h_d - first.h_d) - integral);
  }

  const std::size_t rows = traj.audit.size();
  ControlSummary sum;
  sum.distance_ratio = d0 > 0.0 ? d_t / d0 : kNaN;  // NaN without a target
  sum.max_hd_increment_rel = traj.max_hd_increment / std::abs(first.h_d);
  sum.c1_drift_rel = drift_rel(0);
  sum.c2_drift_rel = drift_rel(1);
  sum.audit_pass_fraction = static_cast<double>(literal_ok) / static_cast<double>(rows);
  sum.max_abs_u = max_abs_u;

  json report;
  report["command"] = "control";
  report["plant_model"] = cfg.control.plant_model;
  report["controller_model"] = cfg.control.controller_model;
  report["records"] = rows;
  report["distance_initial"] = finite_or_null(d0);
  report["distance_final"] = finite_or_null(d_t);
  report["distance_ratio"] = finite_or_null(sum.distance_ratio);
  report["hd_initial"] = first.h_d;
  report["hd_final"] = last.h_d;
  report["max_hd_increment"] = traj.max_hd_increment;
  report["max_hd_increment_rel"] = sum.max_hd_increment_rel;
  report["casimir_initial"] = std::vector<double>(first.casimirs.data(), first.casimirs.data() + first.casimirs.size());
  report["casimir_final"] = std::vector<double>(last.casimirs.data(), last.casimirs.data() + last.casimirs.size());
  report["casimir_drift_rel"] = std::vector<double>(drift_rel.data(), drift_rel.data() + drift_rel.size());
  report["audit"] = {{"tolerance", tol},
                     {"rows", rows},
                     {"rows_within_bound", literal_ok},
                     {"fraction_within_bound", sum.audit_pass_fraction},
                     {"rows_within_shaped_bound", shaped_ok},
                     {"fraction_within_shaped_bound", static_cast<double>(shaped_ok) / static_cast<double>(rows)},
                     {"max_excess_over_integrated_bound", finite_or_null(worst_excess)}};
  const control::RobustnessLedger& led = cl.system.ledger;
  report["ledger"] = {{"lambda", led.lambda},
                      {"epsilon", led.epsilon},
                      {"eta_bar", led.eta_bar},
                      {"confidence", led.confidence},
                      {"decrement_coeff", led.decrement_coeff()},
                      {"offset", led.epsilon > 0.0 ? json(led.offset()) : json(nullptr)}};
  report["eta_bar"] = eta_json(eb);
  report["max_abs_u"] = max_abs_u;
  report["max_balance_residual"] = traj.max_balance_residual;
  report["max_cfl"] = traj.max_cfl;
  write_json(out / "report.json", report);
  log << fmt::format(
      "distance ratio {:.4f}; max H_d increment {:.3e} (rel {:.1e}); Casimir drift rel {:.1e}, {:.1e}; "
      "audit {}/{} within bound ({}/{} shaped)\n",
      sum.distance_ratio, traj.max_hd_increment, sum.max_hd_increment_rel, drift_rel(0), drift_rel(1), literal_ok,
      rows, shaped_ok, rows);
  return sum;
}

}  // namespace

int cmd_control(const ExperimentConfig& cfg, const std::optional<std::string>& model_path, std::ostream& log) {
  run_control(cfg, model_path, log);
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::optional<std::string>& model_path, std::ostream& log) {
  if (cfg.sweep.values.empty()) {
    throw ConfigError("sweep.values must list at least one value");
  }
  const fs::path out = prepare_output(cfg);
  std::optional<std::string> shared_model = model_path;
  if (!shared_model && needs_model(cfg)) {
    obtain_model(cfg, std::nullopt, log);
    shared_model = (out / "model.json").string();
  }

  const std::size_t n = cfg.sweep.values.size();
  std::vector<ExperimentConfig> runs;
  runs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ExperimentConfig c = with_parameter(cfg, cfg.sweep.parameter, cfg.sweep.values[i]);
    c.output_dir = (out / fmt::format("run_{}", i)).string();
    runs.push_back(std::move(c));
  }

  std::vector<ControlSummary> results(n);
  std::vector<std::string> logs(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      std::ostringstream run_log;
      try {
        results[i] = run_control(runs[i], shared_model, run_log);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
      logs[i] = run_log.str();
    }
  };
  const std::size_t n_threads = std::min(cfg.sweep.threads, n);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& th : pool) {
    th.join();
  }

  bool all_ok = true;
  CsvWriter w((out / "sweep.csv").string());
  w.comment("gpdphs sweep v1");
  w.comment(fmt::format("parameter: {}; status 0 = ok, 2 = error (see report.json)", cfg.sweep.parameter));
  w.header({"index", "value", "status", "distance_ratio", "max_hd_increment_rel", "c1_drift_rel", "c2_drift_rel",
            "audit_fraction", "max_abs_u"});
  json run_reports = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const bool ok = errors[i].empty();
    all_ok = all_ok && ok;
    const ControlSummary& r = results[i];
    const double row[] = {static_cast<double>(i), cfg.sweep.values[i], ok ? 0.0 : 2.0, r.distance_ratio,
                          r.max_hd_increment_rel, r.c1_drift_rel, r.c2_drift_rel, r.audit_pass_fraction,
                          r.max_abs_u};
    w.row(row);
    run_reports.push_back({{"index", i},
                           {"value", cfg.sweep.values[i]},
                           {"output_dir", fmt::format("run_{}", i)},
                           {"error", ok ? json(nullptr) : json(errors[i])}});
    log << fmt::format("[run {}] {} = {}\n{}", i, cfg.sweep.parameter, format_double(cfg.sweep.values[i]), logs[i]);
    if (!ok) {
      log << fmt::format("[run {}] error: {}\n", i, errors[i]);
    }
  }
  write_json(out / "report.json", {{"command", "sweep"},
                                   {"parameter", cfg.sweep.parameter},
                                   {"threads", n_threads},
                                   {"runs", run_reports}});
  return all_ok ? 0 : 2;
}

}  // namespace gpdphs::app
