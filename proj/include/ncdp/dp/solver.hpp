#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ncdp/dp/minimize.hpp"
#include "ncdp/dp/problem.hpp"

namespace ncdp::dp {

struct SolverConfig {
    SearchConfig search;
    double eps_opt = 1e-6;
    double eps_gap = 1e-3;
    int threads = 0;        ///< 0 keeps the OpenMP default
    bool parallel = true;   ///< false runs the serial reference kernel
};

/// h~ at a node on the grid of the incoming state s_{t-1}, with the table argmins.
struct ValueTable {
    NodeIndex node = 0;
    int grid = -1;                          ///< index into Problem::grids; -1 if absent
    std::vector<double> values;             ///< +inf encoded as kInf
    std::vector<std::vector<double>> argmin;
    long evaluations = 0;
    double max_box = 0.0;
};

struct Solution {
    ExtReal value = ExtReal::inf();          ///< root value from exact lazy recursion
    ExtReal table_value = ExtReal::inf();    ///< root value against interpolated tables only
    ExtReal forward_value = ExtReal::inf();  ///< E h of the extracted policy
    AdaptedSequence policy;
    std::vector<ValueTable> tables;          ///< per node; empty values where no table is needed
    std::vector<std::vector<double>> continuation;  ///< E over children of h~, per node on grids[t]
    long table_evaluations = 0;
    long exact_evaluations = 0;
};

/// Backward recursion h~_T = h, h_t = E_t h~_t, h~_{t-1} = inf_{x_t} h_t.
///
/// Tables of h~ are built stage by stage on the state grids (parallel across
/// nodes and grid points). They steer the search; values and argmins on the
/// optimal path come from an exact lazy recursion over the tree, memoized by
/// (node, state), so the policy equalities hold to minimizer precision.
class Solver {
public:
    Solver(const Problem& problem, SolverConfig cfg);

    /// Tables, exact root value, forward pass; throws GridTooCoarse or
    /// SearchBoxExhausted naming the node.
    Solution solve();

    /// Builds the value tables only.
    void build_tables();

    /// h_t(s_{t-1}, x_t) at node v with exact continuation.
    [[nodiscard]] ExtReal h(NodeIndex v, std::span<const double> prev, std::span<const double> x);
    /// h~_{t-1}(s_{t-1}) at node v: exact section minimum (memoized).
    [[nodiscard]] const SearchResult& section(NodeIndex v, std::span<const double> prev);
    /// h_t with the continuation read from the tables.
    [[nodiscard]] ExtReal table_h(NodeIndex v, std::span<const double> prev, std::span<const double> x) const;

    /// Greedy exact policy starting from the initial state.
    [[nodiscard]] AdaptedSequence extract_policy();

    [[nodiscard]] const Problem& problem() const { return p_; }
    [[nodiscard]] const SolverConfig& config() const { return cfg_; }
    [[nodiscard]] const std::vector<ValueTable>& tables() const { return tables_; }
    [[nodiscard]] bool has_continuation_table(NodeIndex v) const { return !cont_[v].empty(); }

private:
    [[nodiscard]] ExtReal continuation_table(NodeIndex v, std::span<const double> s) const;
    [[nodiscard]] SearchResult minimize_at(NodeIndex v, std::span<const double> prev, const Objective& f,
                                           const Objective* guide) const;
    [[nodiscard]] bool needs_table(NodeIndex v) const;

    const Problem& p_;
    SolverConfig cfg_;
    std::vector<ValueTable> tables_;
    std::vector<std::vector<double>> cont_;
    std::vector<std::optional<AffineParam>> params_;  // per node, from decision-cost equalities
    std::vector<bool> direct_;                        // children are leaves without decisions
    bool built_ = false;
    std::unordered_map<std::string, SearchResult> memo_;
    long exact_evals_ = 0;
    long table_evals_ = 0;
};

/// Convenience wrapper: Solver(problem, cfg).solve().
[[nodiscard]] Solution backward_solve(const Problem& problem, const SolverConfig& cfg = {});

/// Nearest-neighbour policy lookup in a table; empty if the table is absent.
[[nodiscard]] std::vector<double> policy_lookup(const Problem& problem, const ValueTable& table,
                                                std::span<const double> state);

struct VerifyReport {
    std::vector<ExtReal> chain;        ///< E h_t(x^t), t = 0..T
    ExtReal root_value = ExtReal::inf();
    std::vector<double> node_gap;      ///< h_t(x^t) - h~_{t-1}(x^{t-1}) per node (+inf if infeasible)
    double max_chain_gap = 0.0;        ///< largest |E h_t - E h_{t-1}| (with E h_{-1} = root value)
    double max_node_gap = 0.0;
    bool optimal = false;
};

/// Evaluates E h_t(x^t), t = 0..T, along a candidate using the solver's exact recursion.
/// Optimal iff the chain is constant (equal to the root value) and every node attains its section minimum.
[[nodiscard]] VerifyReport verify_optimality(Solver& solver, const AdaptedSequence& candidate);

}  // namespace ncdp::dp
