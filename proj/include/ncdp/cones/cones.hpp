#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncdp/dp/problem.hpp"
#include "ncdp/linalg/rational.hpp"
#include "ncdp/market/market.hpp"

namespace ncdp::cones {

using market::Verdict;
using tree::NodeIndex;

/// Shape of K = {x adapted : h_inf(x, leaf) <= 0 for every leaf}.
enum class ConeKind { Trivial, Linear, Cone, Unknown };
[[nodiscard]] std::string to_string(ConeKind k);

struct CheckReport {
    Verdict verdict = Verdict::Undecided;
    ConeKind kind = ConeKind::Unknown;
    std::optional<dp::AdaptedSequence> witness;  ///< nonzero direction in K when the verdict is Fails
    std::vector<std::vector<double>> lineality;  ///< basis of K intersected with -K (stacked decisions)
    std::vector<std::string> trace;

    /// Holds, or K is a linear space (the linearity route applies).
    [[nodiscard]] bool holds_or_linear() const {
        return verdict == Verdict::Holds || (verdict == Verdict::Fails && kind == ConeKind::Linear);
    }
    [[nodiscard]] nlohmann::json to_json(const tree::ScenarioTree& tree) const;
};

/// Decides {x adapted : h_inf(x) <= 0} = {0} for problems with affine transitions.
///
/// Exact rational LPs when every leaf horizon is polyhedral: K is empty of
/// nonzero points iff {x in K, +-x_i >= 1} is infeasible for every i; the
/// lineality space of K comes from the same system with -x added. Otherwise
/// directions on the unit sphere are sampled (seeded) and any candidate is
/// re-verified numerically; without a verified witness the verdict is Undecided.
[[nodiscard]] CheckReport check_horizon_positivity(const dp::Problem& p);

/// Market models: the horizon surrogate of the cash form.
[[nodiscard]] CheckReport check_horizon_positivity(const market::MarketModel& m);

/// Per-node subspaces N_t(v): decisions at v that extend to a null direction
/// whose decisions at earlier times vanish.
struct DirectionSet {
    enum class Kind { Exact, Undecided };
    Kind kind = Kind::Exact;
    std::vector<linalg::RMat> basis;  ///< per node, rows span N_t(v)
    std::string note;

    [[nodiscard]] bool trivial() const;
    [[nodiscard]] nlohmann::json to_json(const tree::ScenarioTree& tree) const;
};

/// Throws NotASubspace when K is a cone that is not linear.
[[nodiscard]] DirectionSet null_space(const dp::Problem& p);
[[nodiscard]] DirectionSet null_space(const market::MarketModel& m);

/// Adds the indicator of the orthogonal complement of N_t(v) to every decision
/// cost. Throws InexactNullSpace for an undecided direction set.
[[nodiscard]] dp::Problem project_problem(const dp::Problem& p, const DirectionSet& N);

struct ArbitrageResult {
    bool arbitrage = false;
    dp::AdaptedSequence holdings;  ///< per non-leaf node, scaled to max |entry| = 1
    double expected_gain = 0.0;    ///< with sum |holdings| <= 1 before scaling
};

/// Frictionless reference check: maximize the expected gain of adapted
/// holdings subject to nonnegative gains at every leaf and sum |holdings| <= 1
/// (exact rational simplex on the dyadic prices).
[[nodiscard]] ArbitrageResult no_arbitrage_lp(const tree::ScenarioTree& tree,
                                              const std::vector<std::vector<double>>& Z);
/// Throws ModelNotFrictionless unless every node is frictionless.
[[nodiscard]] ArbitrageResult no_arbitrage_lp(const market::MarketModel& m);

}  // namespace ncdp::cones
