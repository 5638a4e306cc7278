#include <cmath>

#include <gtest/gtest.h>

#include "ncdp/dp/minimize.hpp"
#include "ncdp/efun/ext_fun.hpp"
#include "ncdp/errors.hpp"

namespace ncdp::dp {
namespace {

Objective of(const efun::ExtFun& f) {
    return [f](std::span<const double> x) { return f.eval(x); };
}

// Two-well min((x+1)^2, (x-1)^2 + 0.5) sampled on [-5, 5] with 1001 points.
efun::ExtFun two_well() {
    std::vector<double> x, y;
    for (int i = 0; i <= 1000; ++i) {
        const double t = -5.0 + 0.01 * i;
        x.push_back(t);
        y.push_back(std::min((t + 1) * (t + 1), (t - 1) * (t - 1) + 0.5));
    }
    const double sl = (y[1] - y[0]) / (x[1] - x[0]);
    const double sr = (y[1000] - y[999]) / (x[1000] - x[999]);
    return efun::sampled1d(x, y, sl, sr);
}

TEST(MinimizeSection, TwoWellGlobalMinimum) {
    // Reference: dense-grid minimum 0 at -1 (tests/oracles/efun_oracles.py).
    const auto r = minimize_section(of(two_well()), 1, SearchConfig{});
    EXPECT_NEAR(r.value.value(), 0.0, 1e-12);
    ASSERT_EQ(r.argmin.size(), 1u);
    EXPECT_NEAR(r.argmin[0], -1.0, 1e-6);
}

TEST(MinimizeSection, QuadraticOffGrid) {
    const auto f = efun::precompose(efun::power_cost(1.0, 2.0, 2), {{1, 0}, {0, 1}}, {-0.3, 1.7});
    const auto r = minimize_section(of(f), 2, SearchConfig{});
    EXPECT_NEAR(r.argmin[0], 0.3, 1e-6);
    EXPECT_NEAR(r.argmin[1], -1.7, 1e-6);
    EXPECT_LT(r.value.value(), 1e-11);
}

TEST(MinimizeSection, EmptyDomainGivesInfinity) {
    const auto f = efun::indicator_box({5000.0}, {5001.0});
    const auto r = minimize_section(of(f), 1, SearchConfig{});
    EXPECT_TRUE(r.value.is_inf());
    EXPECT_TRUE(r.argmin.empty());
}

TEST(MinimizeSection, UnboundedBelowExhaustsBox) {
    const auto f = efun::affine({-1.0}, 0.0);
    EXPECT_THROW((void)minimize_section(of(f), 1, SearchConfig{}), SearchBoxExhausted);
}

TEST(MinimizeSection, LexicographicTieBreak) {
    // Flat at 0 on [-1,1]^2 inside a steep bowl.
    const auto f = efun::sum({efun::indicator_box({-1, -1}, {1, 1}), efun::affine({0, 0}, 0.0)});
    const auto r = minimize_section(of(f), 2, SearchConfig{});
    EXPECT_DOUBLE_EQ(r.argmin[0], -1.0);
    EXPECT_DOUBLE_EQ(r.argmin[1], -1.0);
}

TEST(MinimizeSection, CurvedConstraintBoundary) {
    // min -x - y on the disk x^2 + y^2 <= 1 via the epigraph of a power cost.
    const Objective f = [](std::span<const double> x) {
        if (x[0] * x[0] + x[1] * x[1] > 1.0) return ExtReal::inf();
        return ExtReal(-x[0] - x[1]);
    };
    const auto r = minimize_section(f, 2, SearchConfig{});
    EXPECT_NEAR(r.value.value(), -std::sqrt(2.0), 1e-5);
}

TEST(MinimizeSection, AffineParametrization) {
    // Minimize over the line x0 = x1 only.
    const auto f = efun::precompose(efun::power_cost(1.0, 2.0, 2), {{1, 0}, {0, 1}}, {-1.0, 0.0});
    AffineParam p{{0.0, 0.0}, {{1.0, 1.0}}};
    const auto r = minimize_section(of(f), 2, SearchConfig{}, nullptr, &p);
    EXPECT_NEAR(r.argmin[0], 0.5, 1e-6);
    EXPECT_NEAR(r.argmin[1], 0.5, 1e-6);
}

TEST(MinimizeSection, GuideSteersTheGrid) {
    const auto f = two_well();
    // A guide that prefers the right well; the exact refinement still starts from its
    // best local minima, which include both wells.
    const Objective guide = [](std::span<const double> x) { return ExtReal(std::abs(std::abs(x[0]) - 1.0)); };
    const auto r = minimize_section(of(f), 1, SearchConfig{}, &guide);
    EXPECT_NEAR(r.argmin[0], -1.0, 1e-6);
}

}  // namespace
}  // namespace ncdp::dp
