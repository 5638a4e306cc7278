#include <cmath>

#include <gtest/gtest.h>

#include "ncdp/dp/brute_force.hpp"
#include "ncdp/dp/solver.hpp"
#include "ncdp/errors.hpp"
#include "ncdp/io/problem_io.hpp"
#include "ncdp/market/market.hpp"

namespace ncdp::market {
namespace {

MarketModel load(const std::string& name) {
    return model_from_json(io::read_json_file(std::string(NCDP_FIXTURE_DIR) + "/" + name));
}

const ConditionResult& find(const ValidationReport& r, const std::string& cond, const std::string& node = "") {
    for (const auto& c : r.results) {
        if (c.condition == cond && c.node == node) return c;
    }
    throw std::runtime_error("missing " + cond);
}

TEST(MarketModel, LoadsClaimsWithSigns) {
    const auto m = load("two_asset_illiquid.json");
    EXPECT_EQ(m.assets, 2u);
    EXPECT_DOUBLE_EQ(m.claims[0], -0.5);
    for (auto leaf : m.tree->leaves()) EXPECT_DOUBLE_EQ(m.claims[leaf], -0.2);
    EXPECT_FALSE(m.frictionless());
    EXPECT_DOUBLE_EQ(m.V_lower, -1.0);
}

TEST(MarketModel, RejectsUnboundedUtilityAndNamesField) {
    auto j = io::read_json_file(std::string(NCDP_FIXTURE_DIR) + "/frictionless_exp.json");
    j["utility"] = {{"kind", "sampled"}, {"x", {0, 1}}, {"y", {0, 1}}, {"left_slope", 1}, {"right_slope", 1}};
    try {
        (void)model_from_json(j);
        FAIL();
    } catch (const InvalidModel& e) {
        EXPECT_NE(std::string(e.what()).find("utility"), std::string::npos);
    }
    j["utility"] = {{"kind", "sshaped"}};
    j["tree"][1]["data"].erase("Z");
    EXPECT_THROW((void)model_from_json(j), InvalidModel);
}

TEST(MarketModel, SinglePeriodTreeHasNoTradingStage) {
    auto j = io::read_json_file(std::string(NCDP_FIXTURE_DIR) + "/frictionless_exp.json");
    j["tree"] = nlohmann::json::array({j["tree"][0]});
    const auto m = model_from_json(j);
    EXPECT_THROW((void)build_problem_cash(m), NoCashAccount);
}

TEST(MarketModel, LiquidationValue) {
    const auto m = load("sshaped_illiquid.json");
    const std::vector<double> phi{2.0};
    EXPECT_DOUBLE_EQ(liquidation_value(m, 0, phi), 2.0);
    EXPECT_DOUBLE_EQ(liquidation_value(m, 0, phi, true), 2.0 - 0.1 * 4.0);
}

TEST(Validate, SuperlinearCostsAndSShapedUtility) {
    const auto r = validate(load("sshaped_illiquid.json"));
    EXPECT_TRUE(r.cost_condition_all);
    EXPECT_TRUE(r.utility_ok);
    EXPECT_EQ(find(r, "kk1", "r").verdict, Verdict::Holds);
    EXPECT_EQ(find(r, "kk2", "uu").verdict, Verdict::Holds);
    EXPECT_EQ(find(r, "assV").verdict, Verdict::Holds);
    EXPECT_EQ(find(r, "inada").verdict, Verdict::Fails);
    // Quadratic costs are not monotone in the trade: selling a lot costs more than selling less.
    EXPECT_EQ(find(r, "free_disposal", "r").verdict, Verdict::Fails);
}

TEST(Validate, FrictionlessFailsCostConditionWithCounterexample) {
    const auto r = validate(load("sshaped_frictionless.json"));
    EXPECT_FALSE(r.cost_condition_all);
    const auto& k1 = find(r, "kk1", "r");
    EXPECT_EQ(k1.verdict, Verdict::Fails);
    ASSERT_EQ(k1.counterexample.size(), 1u);
    EXPECT_LT(k1.counterexample[0], 0.0);
    EXPECT_EQ(find(r, "free_disposal", "r").verdict, Verdict::Holds);
}

TEST(Validate, ExponentialUtilityHasInada) {
    const auto r = validate(load("frictionless_exp.json"));
    EXPECT_TRUE(r.utility_ok);
    EXPECT_EQ(find(r, "inada").verdict, Verdict::Holds);
    EXPECT_TRUE(r.to_json().contains("conditions"));
}

double solve_value(const dp::Problem& p) { return dp::backward_solve(p).value.value(); }

TEST(CashForm, FrictionlessExponentialMatchesOracle) {
    // Oracle: grid minimum -0.652360086049 at 0.45 (201 points on [-5, 5]);
    // continuous minimum -0.652375328480.
    const auto m = load("frictionless_exp.json");
    const auto p = build_problem_cash(m);
    EXPECT_NEAR(solve_value(p), -0.652375328480, 1e-6);
    const auto bf = dp::brute_force(p, dp::uniform_decision_grids(p, -5, 5, 201));
    EXPECT_NEAR(bf.value.value(), -0.652360086049, 1e-9);
    EXPECT_NEAR(bf.argmin.x[0][0], 0.45, 1e-12);
}

TEST(CashForm, TwoAssetMatchesOracle) {
    // Oracle: -0.330170214115 at (0.04, 0.06) on 201^2 points of [-2, 2].
    const auto m = load("two_asset_illiquid.json");
    const auto p = build_problem_cash(m);
    const auto bf = dp::brute_force(p, dp::uniform_decision_grids(p, -2, 2, 201));
    EXPECT_NEAR(bf.value.value(), -0.330170214115, 1e-9);
    EXPECT_NEAR(bf.argmin.x[0][0], 0.04, 1e-12);
    EXPECT_NEAR(bf.argmin.x[0][1], 0.06, 1e-12);
    const double v = solve_value(p);
    EXPECT_LE(v, bf.value.value() + 1e-9);
    EXPECT_NEAR(v, -0.3301744, 1e-6);
}

TEST(CashForm, TwoPeriodIlliquidMatchesOracle) {
    // Oracle: -0.502984987145 on 121 points of [-3, 3] per decision; continuous about -0.5030386.
    const auto m = load("sshaped_illiquid.json");
    const auto p = build_problem_cash(m);
    const auto bf = dp::brute_force(p, dp::uniform_decision_grids(p, -3, 3, 121));
    EXPECT_NEAR(bf.value.value(), -0.502984987145, 1e-9);
    const double v = solve_value(p);
    EXPECT_LE(v, bf.value.value() + 1e-9);
    EXPECT_NEAR(v, -0.5030386, 1e-6);
}

TEST(TerminalForm, AgreesWithCashForm) {
    // The two-period illiquid model is covered by the acceptance run.
    for (const char* name : {"two_asset_illiquid.json", "sshaped_frictionless.json", "frictionless_exp.json"}) {
        const auto m = load(name);
        const double cash = solve_value(build_problem_cash(m));
        const double term = solve_value(build_problem_terminal(m));
        EXPECT_NEAR(term, cash, 1e-3 * (1 + std::abs(cash))) << name;
    }
}

TEST(HorizonSurrogate, DropsSuperlinearCosts) {
    const auto m = load("sshaped_illiquid.json");
    const auto s = horizon_surrogate(m);
    for (std::size_t v = 0; v < s.tree->size(); ++v) EXPECT_TRUE(s.transitions[v].terms.empty());
    const auto f = s.path_function(s.tree->leaves()[0]);
    // Any nonzero trade is infinitely costly in the surrogate.
    std::vector<double> x(f.dim(), 0.0);
    EXPECT_TRUE(f.eval(x).is_finite());
    x[0] = 1.0;
    EXPECT_TRUE(f.eval(x).is_inf());
}

}  // namespace
}  // namespace ncdp::market
