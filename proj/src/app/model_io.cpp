// SPDX-License-Identifier: Apache-2.0

#include "gpdphs/app/model_io.hpp"

#include <fstream>
#include <vector>

#include <fmt/format.h>

#include "gpdphs/error.hpp"
#include "gpdphs/swe/swe.hpp"

namespace gpdphs::app {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "gpdphs.learned_hamiltonian";

std::vector<double> to_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

json model_to_json(const learn::LearnedHamiltonian& lh) {
  const gp::GpPosterior& gp = lh.gp();
  json j;
  j["format"] = kFormatName;
  j["version"] = kModelFormatVersion;
  j["dim"] = gp.dim();
  j["prior"] = {{"kind", lh.prior().kind}, {"params", lh.prior().params}};
  j["hyper"] = {{"sigma_f", gp.hyper().sigma_f},
                {"length_scales", to_vector(gp.hyper().length_scales)},
                {"sigma_n", gp.hyper().sigma_n}};
  json inputs = json::array();
  for (Eigen::Index i = 0; i < gp.inputs().rows(); ++i) {
    inputs.push_back(to_vector(gp.inputs().row(i).transpose()));
  }
  j["inputs"] = std::move(inputs);
  j["targets"] = to_vector(gp.targets());
  return j;
}

learn::LearnedHamiltonian model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormatName) {
      throw ConfigError(fmt::format("model format '{}' is not '{}'", j.at("format").get<std::string>(), kFormatName));
    }
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ConfigError(fmt::format("model format version {} is not supported (expected {})", version,
                                    kModelFormatVersion));
    }
    const auto dim = j.at("dim").get<std::size_t>();
    learn::PriorDescriptor prior;
    prior.kind = j.at("prior").at("kind").get<std::string>();
    prior.params = j.at("prior").at("params").get<std::vector<double>>();

    const auto ls = j.at("hyper").at("length_scales").get<std::vector<double>>();
    gp::Hyperparams h;
    h.sigma_f = j.at("hyper").at("sigma_f").get<double>();
    h.sigma_n = j.at("hyper").at("sigma_n").get<double>();
    h.length_scales = Eigen::Map<const Eigen::VectorXd>(ls.data(), static_cast<Eigen::Index>(ls.size()));
    h.validate(dim);

    const auto& rows = j.at("inputs");
    const auto targets = j.at("targets").get<std::vector<double>>();
    if (rows.size() != targets.size() || rows.empty()) {
      throw DimensionError(fmt::format("model has {} inputs and {} targets", rows.size(), targets.size()));
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = rows[i].get<std::vector<double>>();
      if (r.size() != dim) {
        throw DimensionError(fmt::format("model input {} has {} entries, expected {}", i, r.size(), dim));
      }
      for (std::size_t k = 0; k < dim; ++k) {
        x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = r[k];
      }
    }
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
    gp::MeanFunction mean = swe::mean_from_descriptor(prior, dim);
    return learn::LearnedHamiltonian(gp::GpPosterior::fit(std::move(x), std::move(y), h, std::move(mean)),
                                     std::move(prior));
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed model document: {}", e.what()));
  }
}

void save_model(const std::string& path, const learn::LearnedHamiltonian& lh) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(fmt::format("cannot open '{}' for writing", path));
  }
  out << model_to_json(lh).dump(2) << '\n';
}

learn::LearnedHamiltonian load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot open model file '{}'", path));
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("model file '{}': {}", path, e.what()));
  }
  return model_from_json(j);
}

}  // namespace gpdphs::app
