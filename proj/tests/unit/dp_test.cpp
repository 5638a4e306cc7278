#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ncdp/dp/brute_force.hpp"
#include "ncdp/dp/solver.hpp"
#include "ncdp/errors.hpp"
#include "ncdp/io/problem_io.hpp"

namespace ncdp::dp {
namespace {

Problem load(const std::string& name) {
    return io::problem_from_json(io::read_json_file(std::string(NCDP_FIXTURE_DIR) + "/" + name));
}

TEST(StateGrid, BilinearIsExactOnAffine) {
    const std::vector<double> lo{0, -1}, hi{2, 1};
    const std::vector<std::size_t> n{5, 3};
    const auto g = StateGrid::uniform(lo, hi, n);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto p = g.point(i);
        v[i] = 2 * p[0] - 3 * p[1] + 1;
    }
    const std::vector<double> s{1.3, 0.2};
    EXPECT_NEAR(g.interpolate(v, s).value(), 2 * 1.3 - 0.6 + 1, 1e-12);
    EXPECT_TRUE(g.interpolate(v, std::vector<double>{2.5, 0}).is_inf());
}

TEST(StateGrid, SinglePointAxisIsIgnoredAndInfinityPropagates) {
    StateGrid g;
    g.axes = {{0.0, 1.0}, {7.0}};
    std::vector<double> v{1.0, kInf};
    EXPECT_DOUBLE_EQ(g.interpolate(v, std::vector<double>{0.0, -100.0}).value(), 1.0);
    EXPECT_TRUE(g.interpolate(v, std::vector<double>{0.5, 7.0}).is_inf());
}

TEST(BackwardSolve, DeterministicQuadratic) {
    const auto p = load("quadratic_t0.json");
    const auto sol = backward_solve(p);
    EXPECT_NEAR(sol.value.value(), 0.0, 1e-6);
    ASSERT_EQ(sol.policy.x[0].size(), 1u);
    EXPECT_NEAR(sol.policy.x[0][0], 3.0, 1e-6);
    EXPECT_NEAR(sol.forward_value.value(), 0.0, 1e-6);
}

TEST(BruteForce, QuadraticOnIntegerGrid) {
    const auto p = load("quadratic_t0.json");
    const auto r = brute_force(p, uniform_decision_grids(p, 0, 4, 5));
    EXPECT_DOUBLE_EQ(r.value.value(), 0.0);
    EXPECT_DOUBLE_EQ(r.argmin.x[0][0], 3.0);
}

TEST(BruteForce, BudgetGuard) {
    const auto p = load("generic_history_t1.json");
    EXPECT_THROW((void)brute_force(p, uniform_decision_grids(p, -1, 1, 300)), BudgetExceeded);
}

TEST(BruteForce, ParallelMatchesSerial) {
    const auto p = load("generic_history_t1.json");
    const auto g = uniform_decision_grids(p, -3, 3, 41);
    const auto a = brute_force(p, g, true, 4);
    const auto b = brute_force(p, g, false);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.argmin.x, b.argmin.x);
}

TEST(BackwardSolve, GenericHistoryMatchesOracle) {
    // Oracle (tests/oracles/market_oracles.py): grid minimum -0.510480 on 151 points
    // of [-3, 3]; continuous minimum -0.5106 at x0 = -1.24.
    const auto p = load("generic_history_t1.json");
    const auto sol = backward_solve(p);
    EXPECT_NEAR(sol.value.value(), -0.5106, 1e-6);
    EXPECT_NEAR(sol.policy.x[0][0], -1.24, 1e-4);
    EXPECT_NEAR(sol.forward_value.value(), sol.value.value(), 1e-12);
    const auto bf = brute_force(p, uniform_decision_grids(p, -3, 3, 151));
    EXPECT_NEAR(bf.value.value(), -0.510480, 1e-6);
    EXPECT_LE(std::abs(sol.value.value() - bf.value.value()), 1e-3);
}

TEST(BackwardSolve, SerialAndParallelTablesIdentical) {
    const auto p = load("generic_history_t1.json");
    SolverConfig a, b;
    a.parallel = false;
    b.threads = 4;
    const auto sa = backward_solve(p, a);
    const auto sb = backward_solve(p, b);
    EXPECT_EQ(sa.value, sb.value);
    EXPECT_EQ(sa.table_value, sb.table_value);
    for (std::size_t v = 0; v < sa.tables.size(); ++v) {
        EXPECT_EQ(sa.tables[v].values, sb.tables[v].values);
        EXPECT_EQ(sa.tables[v].argmin, sb.tables[v].argmin);
    }
    EXPECT_EQ(sa.policy.x, sb.policy.x);
}

TEST(BackwardSolve, TablesRespectLowerBound) {
    const auto p = load("generic_history_t1.json");
    const auto sol = backward_solve(p);
    for (const auto& tab : sol.tables) {
        if (tab.values.empty()) continue;
        const double m = *p.lower_bound[tab.node];
        for (double v : tab.values) EXPECT_GE(v, m - 1e-6);
    }
}

TEST(Verify, PolicyIsOptimalAndZeroStrategyIsNot) {
    const auto p = load("generic_history_t1.json");
    Solver s(p, {});
    const auto sol = s.solve();
    const auto rep = verify_optimality(s, sol.policy);
    EXPECT_TRUE(rep.optimal);
    EXPECT_LE(rep.max_chain_gap, 1e-6);

    AdaptedSequence zero;
    zero.x.assign(p.tree->size(), std::vector<double>{0.0});
    const auto z = verify_optimality(s, zero);
    EXPECT_FALSE(z.optimal);
    ASSERT_EQ(z.chain.size(), 2u);
    EXPECT_GE(z.chain[0].value(), sol.value.value() - 1e-6);
    EXPECT_GE(z.chain[1].value(), z.chain[0].value() - 1e-12);
}

TEST(Verify, RandomStrategiesNeverBeatTheRoot) {
    const auto p = load("generic_history_t1.json");
    Solver s(p, {});
    const auto sol = s.solve();
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int k = 0; k < 20; ++k) {
        AdaptedSequence x;
        for (std::size_t v = 0; v < p.tree->size(); ++v) x.x.push_back({u(rng)});
        const auto rep = verify_optimality(s, x);
        for (const auto& c : rep.chain) EXPECT_GE(c.value(), sol.value.value() - 1e-6);
    }
}

}  // namespace
}  // namespace ncdp::dp
