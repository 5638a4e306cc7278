#pragma once

#include <memory>

#include <nlohmann/json.hpp>

#include "ncdp/dp/problem.hpp"

namespace ncdp::io {

/// Generic problem file with history state:
///
///   {"tree": [...], "decision_dims": [n_0, ..., n_T],
///    "objective": {"<leaf id>": <function of (x_0, ..., x_T)>, ...},
///    "lower_bound": {"<leaf id>": m, ...},              (optional)
///    "grids": [{"lo": [...], "hi": [...], "n": [...]}, ...]}   (one per t < T)
///
/// Leaf objectives act on the concatenated decisions along the path.
/// Throws InvalidModel with the offending field.
[[nodiscard]] dp::Problem problem_from_json(const nlohmann::json& j);

/// Reads a JSON file; throws InvalidModel with the parser's byte position on syntax errors.
[[nodiscard]] nlohmann::json read_json_file(const std::string& path);

/// {"lo": [...], "hi": [...], "n": [...]}
[[nodiscard]] dp::StateGrid grid_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json grid_to_json(const dp::StateGrid& g);

}  // namespace ncdp::io
