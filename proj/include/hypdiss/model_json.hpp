#pragma once

#include <filesystem>

#include <json.hpp>

#include "hypdiss/model.hpp"

namespace hypdiss {

// Builds a model from a JSON document. Either
//   {"builtin": {"name": "damped-wave" | "convected-damped-wave" | "fluid", "params": {...}}}
// or an explicit family
//   {"n": 1, "d": 1, "reference_state": [0], "state_domain": {"lo": [..], "hi": [..]},
//    "A": {"0": [[1]], "1": [[0.5]]}, "B": {"0,0": [[-1]], "1,1": [[1]]}}
// where each matrix entry is a number or a list of monomials [{"c": 2.0, "p": [1, 0]}]
// meaning c * prod_i u_i^p_i. Missing A blocks are zero; a missing "0,0" B block is -I.
// The returned model is not normalized.
[[nodiscard]] CoefficientModel model_from_json(const nlohmann::json& doc);
[[nodiscard]] CoefficientModel load_model_file(const std::filesystem::path& path);

}  // namespace hypdiss
