// SPDX-License-Identifier: Apache-2.0
//
// Learned-Hamiltonian file format (JSON text, versioned):
//
//   {
//     "format": "gpdphs.learned_hamiltonian",
//     "version": 1,
//     "dim": d,
//     "prior": {"kind": "swe_quadratic", "params": [g]},
//     "hyper": {"sigma_f": .., "length_scales": [..], "sigma_n": ..},
//     "inputs": [[x_1], ..., [x_N]],
//     "targets": [y_1, ..., y_N]
//   }
//
// Doubles are written in shortest round-trip form, so loading refits the
// posterior on identical data and reproduces predictions exactly.

#pragma once

#include <string>

#include <json.hpp>

#include "gpdphs/learn/hamiltonian.hpp"

namespace gpdphs::app {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const learn::LearnedHamiltonian& lh);
learn::LearnedHamiltonian model_from_json(const nlohmann::json& j);

void save_model(const std::string& path, const learn::LearnedHamiltonian& lh);
learn::LearnedHamiltonian load_model(const std::string& path);

}  // namespace gpdphs::app
