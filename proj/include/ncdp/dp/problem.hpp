#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ncdp/efun/ext_fun.hpp"
#include "ncdp/tree/scenario_tree.hpp"

namespace ncdp::dp {

using tree::NodeIndex;

/// Nonlinear additive term coef * fn(prev, x) in coordinate `target` of the new state.
struct TransitionTerm {
    std::size_t target = 0;
    double coef = 1.0;
    efun::ExtFun fn;  ///< on concat(prev state, decision)
};

/// s = A prev + B x + c + sum of terms. A +inf term makes the transition infeasible.
struct Transition {
    efun::Matrix A;  ///< state_dim(t) x state_dim(t-1)
    efun::Matrix B;  ///< state_dim(t) x n_t
    std::vector<double> c;
    std::vector<TransitionTerm> terms;
};

/// Tensor grid of a stage state space. An axis with one point is ignored by
/// interpolation (the coordinate does not influence later values).
struct StateGrid {
    std::vector<std::vector<double>> axes;

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::size_t dim() const { return axes.size(); }
    [[nodiscard]] std::vector<double> point(std::size_t flat) const;

    /// Multilinear interpolation; +inf outside the grid or if a corner with
    /// positive weight is +inf.
    [[nodiscard]] ExtReal interpolate(std::span<const double> values, std::span<const double> s) const;

    [[nodiscard]] static StateGrid uniform(std::span<const double> lo, std::span<const double> hi,
                                           std::span<const std::size_t> n);
};

/// Decisions x_t(node) for every node; empty vectors where n_t = 0.
struct AdaptedSequence {
    std::vector<std::vector<double>> x;
};

/// Multistage problem on a scenario tree with a Markov state:
///   h(x, omega) = sum over path nodes of decision_cost(x_t) + state_cost(s_t),
///   s_t = transition(s_{t-1}, x_t), s_{-1} = initial_state.
/// Costs default to zero where absent.
class Problem {
public:
    std::shared_ptr<const tree::ScenarioTree> tree;
    std::vector<std::size_t> decision_dims;   ///< n_t per stage
    std::vector<std::size_t> state_dims;      ///< dim s_t per stage
    std::vector<double> initial_state;        ///< s_{-1}
    std::vector<Transition> transitions;      ///< per node
    std::vector<std::optional<efun::ExtFun>> state_cost;     ///< per node, on s_t
    std::vector<std::optional<efun::ExtFun>> decision_cost;  ///< per node, on x_t
    std::vector<std::optional<double>> lower_bound;          ///< per node (leaves), h >= m
    std::vector<StateGrid> grids;             ///< grids[t] discretizes s_t, t = 0..T-1

    /// State is the full decision history (x_0, ..., x_t); no costs set.
    [[nodiscard]] static Problem history(std::shared_ptr<const tree::ScenarioTree> tree,
                                         std::vector<std::size_t> decision_dims);

    /// Throws InvalidModel on inconsistent dimensions.
    void validate() const;

    [[nodiscard]] int horizon() const { return tree->horizon(); }
    [[nodiscard]] std::size_t n(NodeIndex v) const {
        return decision_dims.at(static_cast<std::size_t>(tree->node(v).time));
    }
    /// Dimension of s_{t-1} seen by nodes at time t.
    [[nodiscard]] std::size_t prev_dim(int t) const {
        return t == 0 ? initial_state.size() : state_dims.at(static_cast<std::size_t>(t - 1));
    }
    [[nodiscard]] bool affine_transitions() const;

    /// Computes s = transition(prev, x) into `s`; returns false if infeasible.
    bool step(NodeIndex v, std::span<const double> prev, std::span<const double> x, std::span<double> s) const;

    /// decision_cost(x) + state_cost(s) with s = transition(prev, x) written to `s`.
    [[nodiscard]] ExtReal stage(NodeIndex v, std::span<const double> prev, std::span<const double> x,
                                std::span<double> s) const;

    /// Objective h(x, leaf) along the root-to-leaf path.
    [[nodiscard]] ExtReal path_objective(const AdaptedSequence& x, NodeIndex leaf) const;
    /// E h(x) = sum over leaves of P(leaf) h(x, leaf).
    [[nodiscard]] ExtReal expected_objective(const AdaptedSequence& x) const;

    /// Stacked layout of all decisions: offset of node v's block.
    [[nodiscard]] std::vector<std::size_t> decision_offsets() const;
    [[nodiscard]] std::size_t total_decision_dim() const;
    [[nodiscard]] AdaptedSequence unstack(std::span<const double> flat) const;
    [[nodiscard]] std::vector<double> stack(const AdaptedSequence& x) const;

    /// For affine transitions: h(., leaf) as a function of the stacked decision vector.
    /// Throws UnsupportedStructure otherwise.
    [[nodiscard]] efun::ExtFun path_function(NodeIndex leaf) const;
};

}  // namespace ncdp::dp
