#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncdp/ext_real.hpp"

namespace ncdp::tree {

using NodeIndex = std::size_t;
inline constexpr NodeIndex kNoParent = static_cast<NodeIndex>(-1);

struct Node {
    std::string id;
    int time = 0;
    NodeIndex parent = kNoParent;
    double prob = 1.0;  ///< conditional probability given the parent
    nlohmann::json data = nlohmann::json::object();
};

/// Finite filtration as a rooted tree. Nodes are stored sorted by time, so
/// `nodes_at(t)` is a contiguous index range and parents precede children.
class ScenarioTree {
public:
    ScenarioTree() = default;

    /// Builds the tree and validates it; throws InvalidModel listing every violation.
    explicit ScenarioTree(std::vector<Node> nodes);

    /// Builds without validation. Use `validate()` to inspect problems.
    [[nodiscard]] static ScenarioTree unchecked(std::vector<Node> nodes);

    [[nodiscard]] std::vector<std::string> validate() const;

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] const Node& node(NodeIndex i) const { return nodes_.at(i); }
    [[nodiscard]] NodeIndex root() const noexcept { return 0; }
    [[nodiscard]] NodeIndex find(const std::string& id) const;

    [[nodiscard]] std::span<const NodeIndex> children(NodeIndex i) const { return children_.at(i); }
    [[nodiscard]] bool is_leaf(NodeIndex i) const { return children_.at(i).empty(); }

    /// Indices of nodes at time t, in storage order.
    [[nodiscard]] std::span<const NodeIndex> nodes_at(int t) const;
    [[nodiscard]] std::span<const NodeIndex> leaves() const { return nodes_at(horizon_); }

    /// Unconditional probability of reaching node i.
    [[nodiscard]] double path_prob(NodeIndex i) const { return path_prob_.at(i); }

    /// Root-to-node path, root first.
    [[nodiscard]] std::vector<NodeIndex> path(NodeIndex i) const;

    /// Ancestor of i at time t (i itself if t equals its time).
    [[nodiscard]] NodeIndex ancestor_at(NodeIndex i, int t) const;

    /// Leaves in the subtree rooted at i.
    [[nodiscard]] std::vector<NodeIndex> leaves_under(NodeIndex i) const;

    /// E[f | F_t]: maps values on nodes_at(t+1) to values on nodes_at(t).
    /// A child value of +inf with positive probability yields +inf.
    [[nodiscard]] std::vector<ExtReal> conditional_expectation(int t, std::span<const ExtReal> next) const;

private:
    void index();

    std::vector<Node> nodes_;
    std::vector<std::vector<NodeIndex>> children_;
    std::vector<std::vector<NodeIndex>> by_time_;
    std::vector<double> path_prob_;
    std::unordered_map<std::string, NodeIndex> by_id_;
    int horizon_ = 0;
};

/// Tolerance on sum of conditional probabilities over siblings.
inline constexpr double kProbSumTol = 1e-12;

/// Parses the array-of-nodes JSON layout `[{id, time, parent, prob, data}, ...]`.
/// The root has `parent: null`. Throws InvalidModel on any violation.
[[nodiscard]] ScenarioTree tree_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json tree_to_json(const ScenarioTree& t);

}  // namespace ncdp::tree
