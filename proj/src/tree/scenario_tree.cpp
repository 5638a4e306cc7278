#include "ncdp/tree/scenario_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ncdp/errors.hpp"

namespace ncdp::tree {

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

}  // namespace

ScenarioTree ScenarioTree::unchecked(std::vector<Node> nodes) {
    ScenarioTree t;
    // Stable sort by time, remapping parent indices.
    std::vector<std::size_t> order(nodes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return nodes[a].time < nodes[b].time; });
    std::vector<NodeIndex> new_pos(nodes.size());
    for (std::size_t k = 0; k < order.size(); ++k) new_pos[order[k]] = k;
    t.nodes_.reserve(nodes.size());
    for (std::size_t k : order) {
        Node n = std::move(nodes[k]);
        if (n.parent != kNoParent && n.parent < new_pos.size()) n.parent = new_pos[n.parent];
        t.nodes_.push_back(std::move(n));
    }
    t.index();
    return t;
}

ScenarioTree::ScenarioTree(std::vector<Node> nodes) {
    *this = unchecked(std::move(nodes));
    auto problems = validate();
    if (!problems.empty()) throw InvalidModel("scenario tree: " + join(problems));
}

void ScenarioTree::index() {
    const std::size_t n = nodes_.size();
    children_.assign(n, {});
    by_id_.clear();
    horizon_ = 0;
    for (NodeIndex i = 0; i < n; ++i) {
        by_id_.emplace(nodes_[i].id, i);
        horizon_ = std::max(horizon_, nodes_[i].time);
        const NodeIndex p = nodes_[i].parent;
        if (p != kNoParent && p < n) children_[p].push_back(i);
    }
    by_time_.assign(static_cast<std::size_t>(horizon_) + 1, {});
    for (NodeIndex i = 0; i < n; ++i) {
        if (nodes_[i].time >= 0) by_time_[static_cast<std::size_t>(nodes_[i].time)].push_back(i);
    }
    path_prob_.assign(n, 0.0);
    for (NodeIndex i = 0; i < n; ++i) {
        const NodeIndex p = nodes_[i].parent;
        path_prob_[i] = (p == kNoParent || p >= i) ? nodes_[i].prob : path_prob_[p] * nodes_[i].prob;
    }
}

std::vector<std::string> ScenarioTree::validate() const {
    std::vector<std::string> out;
    if (nodes_.empty()) {
        out.emplace_back("tree has no nodes");
        return out;
    }
    std::size_t roots = 0;
    std::unordered_map<std::string, int> seen;
    for (NodeIndex i = 0; i < nodes_.size(); ++i) {
        const Node& nd = nodes_[i];
        if (++seen[nd.id] == 2) out.push_back("duplicate node id '" + nd.id + "'");
        if (nd.time < 0) out.push_back("node '" + nd.id + "' has negative time");
        if (nd.parent == kNoParent) {
            ++roots;
            if (nd.time != 0) out.push_back("root '" + nd.id + "' must have time 0");
            continue;
        }
        if (nd.parent >= nodes_.size()) {
            out.push_back("node '" + nd.id + "' has unknown parent");
            continue;
        }
        const Node& par = nodes_[nd.parent];
        if (nd.time != par.time + 1) {
            out.push_back("node '" + nd.id + "' time " + std::to_string(nd.time) +
                          " is not parent time + 1");
        }
        if (!(nd.prob > 0.0) || nd.prob > 1.0 || !std::isfinite(nd.prob)) {
            std::ostringstream os;
            os << "node '" << nd.id << "' has conditional probability " << nd.prob << " outside (0,1]";
            out.push_back(os.str());
        }
    }
    if (roots != 1) out.push_back("tree must have exactly one root, found " + std::to_string(roots));
    for (NodeIndex i = 0; i < nodes_.size(); ++i) {
        const auto& ch = children_[i];
        if (ch.empty()) {
            if (nodes_[i].time != horizon_) {
                out.push_back("leaf '" + nodes_[i].id + "' at time " + std::to_string(nodes_[i].time) +
                              " but horizon is " + std::to_string(horizon_));
            }
            continue;
        }
        double s = 0.0;
        for (NodeIndex c : ch) s += nodes_[c].prob;
        if (std::abs(s - 1.0) > kProbSumTol) {
            std::ostringstream os;
            os.precision(17);
            os << "children of '" << nodes_[i].id << "' have probabilities summing to " << s;
            out.push_back(os.str());
        }
    }
    return out;
}

NodeIndex ScenarioTree::find(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw InvalidModel("unknown node id '" + id + "'");
    return it->second;
}

std::span<const NodeIndex> ScenarioTree::nodes_at(int t) const {
    if (t < 0 || t > horizon_) return {};
    return by_time_[static_cast<std::size_t>(t)];
}

std::vector<NodeIndex> ScenarioTree::path(NodeIndex i) const {
    std::vector<NodeIndex> p;
    for (NodeIndex k = i; k != kNoParent; k = nodes_.at(k).parent) p.push_back(k);
    std::reverse(p.begin(), p.end());
    return p;
}

NodeIndex ScenarioTree::ancestor_at(NodeIndex i, int t) const {
    NodeIndex k = i;
    while (nodes_.at(k).time > t) k = nodes_[k].parent;
    return k;
}

std::vector<NodeIndex> ScenarioTree::leaves_under(NodeIndex i) const {
    std::vector<NodeIndex> out;
    std::vector<NodeIndex> stack{i};
    while (!stack.empty()) {
        const NodeIndex k = stack.back();
        stack.pop_back();
        if (children_[k].empty()) {
            out.push_back(k);
            continue;
        }
        for (auto it = children_[k].rbegin(); it != children_[k].rend(); ++it) stack.push_back(*it);
    }
    return out;
}

std::vector<ExtReal> ScenarioTree::conditional_expectation(int t, std::span<const ExtReal> next) const {
    const auto cur = nodes_at(t);
    const auto nxt = nodes_at(t + 1);
    if (next.size() != nxt.size()) {
        throw std::invalid_argument("conditional_expectation: expected " + std::to_string(nxt.size()) +
                                    " values at time " + std::to_string(t + 1));
    }
    // Position of each time-(t+1) node within nodes_at(t+1).
    const NodeIndex base = nxt.empty() ? 0 : nxt.front();
    std::vector<ExtReal> out;
    out.reserve(cur.size());
    for (NodeIndex i : cur) {
        ExtReal acc(0.0);
        for (NodeIndex c : children_[i]) acc += next[c - base].scaled(nodes_[c].prob);
        out.push_back(acc);
    }
    return out;
}

ScenarioTree tree_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw InvalidModel("tree: expected an array of nodes");
    std::vector<Node> nodes;
    std::unordered_map<std::string, std::size_t> pos;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("id") || !e.contains("time")) {
            throw InvalidModel("tree: every node needs 'id' and 'time'");
        }
        Node n;
        n.id = e.at("id").get<std::string>();
        n.time = e.at("time").get<int>();
        n.prob = e.value("prob", 1.0);
        if (e.contains("data")) n.data = e.at("data");
        pos.emplace(n.id, nodes.size());
        nodes.push_back(std::move(n));
    }
    std::size_t k = 0;
    for (const auto& e : j) {
        const auto& p = e.contains("parent") ? e.at("parent") : nlohmann::json();
        if (!p.is_null()) {
            auto it = pos.find(p.get<std::string>());
            if (it == pos.end()) throw InvalidModel("tree: node '" + nodes[k].id + "' has unknown parent");
            nodes[k].parent = it->second;
        }
        ++k;
    }
    return ScenarioTree(std::move(nodes));
}

nlohmann::json tree_to_json(const ScenarioTree& t) {
    nlohmann::json out = nlohmann::json::array();
    for (NodeIndex i = 0; i < t.size(); ++i) {
        const Node& n = t.node(i);
        nlohmann::json e{{"id", n.id}, {"time", n.time}, {"prob", n.prob}, {"data", n.data}};
        e["parent"] = n.parent == kNoParent ? nlohmann::json() : nlohmann::json(t.node(n.parent).id);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace ncdp::tree
