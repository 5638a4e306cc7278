#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "ncdp/dp/brute_force.hpp"
#include "ncdp/dp/solver.hpp"

namespace ncdp::io {

/// +inf is written as the string "inf".
[[nodiscard]] nlohmann::json ext_to_json(ExtReal v);

/// {node id: decision} for nodes with decisions.
[[nodiscard]] nlohmann::json sequence_to_json(const tree::ScenarioTree& tree, const dp::AdaptedSequence& x);

/// Value, table value, forward value, gap, policy and diagnostics.
[[nodiscard]] nlohmann::json solution_to_json(const dp::Problem& p, const dp::Solution& s);
[[nodiscard]] nlohmann::json verify_to_json(const tree::ScenarioTree& tree, const dp::VerifyReport& r);
[[nodiscard]] nlohmann::json brute_force_to_json(const tree::ScenarioTree& tree, const dp::BruteForceResult& r);

/// node,time,prob,x0,x1,... one row per node with decisions.
[[nodiscard]] std::string sequence_csv(const dp::Problem& p, const dp::AdaptedSequence& x);
/// node,point,s0,s1,...,value,a0,a1,... for every tabulated node.
[[nodiscard]] std::string value_tables_csv(const dp::Problem& p, const dp::Solution& s);

void write_text(const std::string& path, const std::string& text);

}  // namespace ncdp::io
