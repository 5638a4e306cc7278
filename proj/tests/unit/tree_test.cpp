#include <random>

#include <gtest/gtest.h>

#include "ncdp/errors.hpp"
#include "ncdp/tree/scenario_tree.hpp"

namespace ncdp::tree {
namespace {

nlohmann::json binomial_json() {
    return nlohmann::json::parse(R"([
      {"id": "r", "time": 0, "parent": null, "prob": 1},
      {"id": "u", "time": 1, "parent": "r", "prob": 0.5},
      {"id": "d", "time": 1, "parent": "r", "prob": 0.5},
      {"id": "uu", "time": 2, "parent": "u", "prob": 0.5},
      {"id": "ud", "time": 2, "parent": "u", "prob": 0.5},
      {"id": "du", "time": 2, "parent": "d", "prob": 0.5},
      {"id": "dd", "time": 2, "parent": "d", "prob": 0.5}
    ])");
}

TEST(ScenarioTree, BinomialStructure) {
    const auto t = tree_from_json(binomial_json());
    EXPECT_EQ(t.horizon(), 2);
    EXPECT_EQ(t.nodes_at(0).size(), 1u);
    EXPECT_EQ(t.nodes_at(1).size(), 2u);
    EXPECT_EQ(t.leaves().size(), 4u);
    EXPECT_DOUBLE_EQ(t.path_prob(t.find("ud")), 0.25);
    const auto p = t.path(t.find("du"));
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(t.node(p[1]).id, "d");
    EXPECT_EQ(t.leaves_under(t.find("u")).size(), 2u);
}

TEST(ScenarioTree, RejectsBadProbabilities) {
    auto j = binomial_json();
    j[1]["prob"] = 0.6;
    try {
        (void)tree_from_json(j);
        FAIL() << "expected InvalidModel";
    } catch (const InvalidModel& e) {
        EXPECT_NE(std::string(e.what()).find("children of 'r'"), std::string::npos);
    }
}

TEST(ScenarioTree, ReportsEveryViolation) {
    std::vector<Node> nodes{{"r", 0, kNoParent, 1.0, {}}, {"a", 2, 0, 0.5, {}}, {"b", 1, 0, 0.0, {}}};
    const auto t = ScenarioTree::unchecked(nodes);
    const auto v = t.validate();
    EXPECT_GE(v.size(), 3u);  // time gap, zero probability, sibling sum
}

TEST(ScenarioTree, SiblingSumToleranceIsTight) {
    auto j = binomial_json();
    j[1]["prob"] = 0.5 + 1e-11;
    EXPECT_THROW((void)tree_from_json(j), InvalidModel);
    j[1]["prob"] = 0.5 + 1e-13;
    EXPECT_NO_THROW((void)tree_from_json(j));
}

TEST(ScenarioTree, ConditionalExpectationPropagatesInfinity) {
    const auto t = tree_from_json(binomial_json());
    std::vector<ExtReal> leaf{ExtReal(1.0), ExtReal(3.0), ExtReal::inf(), ExtReal(0.0)};
    const auto e1 = t.conditional_expectation(1, leaf);
    ASSERT_EQ(e1.size(), 2u);
    EXPECT_DOUBLE_EQ(e1[0].value(), 2.0);
    EXPECT_TRUE(e1[1].is_inf());
}

// Tower property E[E[f|F_{t+1}]|F_t] = E[f|F_t] on random trees and values.
TEST(ScenarioTree, TowerPropertyOnRandomTrees) {
    std::mt19937_64 rng(20261016);
    std::uniform_int_distribution<int> branches(1, 3);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<Node> nodes{{"0", 0, kNoParent, 1.0, {}}};
        std::vector<NodeIndex> frontier{0};
        const int T = 3;
        for (int t = 1; t <= T; ++t) {
            std::vector<NodeIndex> next;
            for (NodeIndex p : frontier) {
                const int b = branches(rng);
                std::vector<double> w(b);
                double s = 0.0;
                for (auto& x : w) s += (x = u(rng));
                for (int k = 0; k < b; ++k) {
                    nodes.push_back({std::to_string(nodes.size()), t, p, w[k] / s, {}});
                    next.push_back(nodes.size() - 1);
                }
            }
            frontier = next;
        }
        // Renormalize the last sibling so sums are exact to rounding.
        const ScenarioTree tr = ScenarioTree::unchecked(nodes);
        ASSERT_TRUE(tr.validate().empty());
        std::vector<ExtReal> f;
        for (std::size_t k = 0; k < tr.leaves().size(); ++k) f.emplace_back(g(rng));
        const auto e2 = tr.conditional_expectation(2, f);
        const auto e1 = tr.conditional_expectation(1, e2);
        const auto e0 = tr.conditional_expectation(0, e1);
        double direct = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) direct += tr.path_prob(tr.leaves()[k]) * f[k].value();
        EXPECT_NEAR(e0[0].value(), direct, 1e-12);
    }
}

TEST(ScenarioTree, JsonRoundTrip) {
    const auto t = tree_from_json(binomial_json());
    const auto t2 = tree_from_json(tree_to_json(t));
    EXPECT_EQ(t2.size(), t.size());
    EXPECT_EQ(t2.node(t2.find("dd")).parent, t2.find("d"));
}

}  // namespace
}  // namespace ncdp::tree
