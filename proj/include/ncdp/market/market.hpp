#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncdp/dp/problem.hpp"
#include "ncdp/efun/ext_fun.hpp"
#include "ncdp/tree/scenario_tree.hpp"

namespace ncdp::market {

using tree::NodeIndex;

/// Illiquidity cost G_t on the risky trade vector.
struct CostSpec {
    enum class Kind { Frictionless, Power };
    Kind kind = Kind::Frictionless;
    double lambda = 0.0;
    double p = 2.0;
};

/// Constraint set D~_t on risky holdings (the cash holding is unconstrained).
struct ConstraintSpec {
    enum class Kind { None, Box, PolyCone };
    Kind kind = Kind::None;
    std::vector<double> lower, upper;
    efun::Matrix normals;
};

/// Utility u (or directly the disutility V(c) = -u(-c)).
struct UtilitySpec {
    enum class Kind { SShaped, Exponential, Sampled, Disutility };
    Kind kind = Kind::SShaped;
    double gamma = 2.0, kappa = 1.0, beta = 1.0;  ///< SShaped
    double risk_aversion = 1.0;                   ///< Exponential
    double range_lo = -10.0, range_hi = 10.0;     ///< Exponential sampling range
    std::size_t points = 2001;
    std::vector<double> x, y;                     ///< Sampled u
    double left_slope = 0.0, right_slope = 0.0;
    std::optional<efun::ExtFun> disutility;       ///< Disutility
    std::optional<double> lower_bound;            ///< Disutility: V >= lower_bound
};

struct MarketModel {
    std::string name;
    std::shared_ptr<const tree::ScenarioTree> tree;
    std::size_t assets = 0;                   ///< risky assets J = d - 1
    std::vector<std::vector<double>> Z;       ///< marginal prices per node
    std::vector<CostSpec> cost;               ///< per node
    std::vector<ConstraintSpec> constraint;   ///< per node (ignored at leaves: D_T = {0})
    std::vector<double> claims;               ///< c_t per node (c_0 includes -X0, c_T includes -W)
    double initial_cash = 0.0;                ///< X0
    UtilitySpec utility;
    efun::ExtFun V;                           ///< disutility V(c) = -u(-c)
    double V_lower = 0.0;                     ///< inf V (lower bound m)
    std::vector<dp::StateGrid> cash_grids;
    std::vector<dp::StateGrid> terminal_grids;
    nlohmann::json oracle = nlohmann::json::object();

    [[nodiscard]] bool frictionless() const;
    [[nodiscard]] int horizon() const { return tree->horizon(); }
};

/// Market file:
///   {"name", "tree": [... node "data": {"Z": [...], "W"?, "c"?, "cost"?, "constraint"?}],
///    "assets": J, "costs": {...}, "constraints": {...},
///    "claims": {"X0": x, "W": w}, "utility": {...},
///    "grids": {"cash": [...], "terminal": [...]}, "oracle": {"lo", "hi", "points"}}
/// Throws InvalidModel naming the field.
[[nodiscard]] MarketModel model_from_json(const nlohmann::json& j);

/// G_t at a node as a function on R^J; nullopt when frictionless.
[[nodiscard]] std::optional<efun::ExtFun> cost_function(const MarketModel& m, NodeIndex v);
/// S~_t(z) = Z_t . z + G_t(z).
[[nodiscard]] efun::ExtFun total_cost(const MarketModel& m, NodeIndex v);

/// phi . Z at the node, minus G(-phi) when `with_frictions`.
[[nodiscard]] double liquidation_value(const MarketModel& m, NodeIndex v, std::span<const double> phi,
                                       bool with_frictions = false);

enum class Verdict { Holds, Fails, Undecided };
[[nodiscard]] std::string to_string(Verdict v);

struct ConditionResult {
    std::string condition;   ///< kk1, kk2, uu1, VT, assV, inada, cond_ca, free_disposal
    std::string node;        ///< node id or empty for model-wide conditions
    Verdict verdict = Verdict::Holds;
    std::string evidence;    ///< analytic tag or method
    std::vector<double> counterexample;
};

struct ValidationReport {
    std::vector<ConditionResult> results;
    /// (kk1) and (kk2) at every trading node: existence follows from the
    /// superlinear-cost argument without a linearity check.
    bool cost_condition_all = false;
    bool utility_ok = false;  ///< (uu1) and (VT)

    [[nodiscard]] Verdict overall(const std::string& condition) const;
    [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] ValidationReport validate(const MarketModel& m);

/// Cash-account form: decisions are risky trades y_t at t < T; state (X_t, phi_t)
/// with X' = X - Z.y - G(y) - c_t and forced liquidation at the leaves,
/// X_T = X + Z.phi - G(-phi) - c_T; leaf cost V(-X_T). Throws NoCashAccount for T = 0.
[[nodiscard]] dp::Problem build_problem_cash(const MarketModel& m);

/// Terminal-expenditure form: decisions z_t = (z0, z~) at t < T, state (z, d) with
/// d_t = dz0 + Z.dz~ + G(dz~) + c_t constrained to d_t <= 0 for t < T; leaf cost V(d_T)
/// with z_T = 0.
[[nodiscard]] dp::Problem build_problem_terminal(const MarketModel& m);

/// Cash-form problem whose horizon equals that of the cash form, with affine
/// transitions: superlinear costs enter as the indicator of {0} on trades and on
/// the liquidated position. Throws UnsupportedStructure for cost kinds without
/// such a representation.
[[nodiscard]] dp::Problem horizon_surrogate(const MarketModel& m);

}  // namespace ncdp::market
