#include <gtest/gtest.h>

#include "ncdp/linalg/affine_solver.hpp"
#include "ncdp/linalg/rational.hpp"

namespace ncdp::linalg {
namespace {

TEST(RationalLp, SmallOptimum) {
    // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x >= 0, y >= 0  ->  (8/5, 6/5), value 14/5
    LinearProgram lp;
    lp.dim = 2;
    lp.add({1, 2}, Relation::LessEq, 4);
    lp.add({3, 1}, Relation::LessEq, 6);
    lp.add({1, 0}, Relation::GreaterEq, 0);
    lp.add({0, 1}, Relation::GreaterEq, 0);
    const auto r = maximize(lp, {1, 1});
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_EQ(r.value, Rational(14, 5));
    EXPECT_EQ(r.x[0], Rational(8, 5));
    EXPECT_EQ(r.x[1], Rational(6, 5));
}

TEST(RationalLp, FreeVariablesAndEqualities) {
    // min x (max -x) s.t. x - y = -3, y >= -1  ->  x = -4
    LinearProgram lp;
    lp.dim = 2;
    lp.add({1, -1}, Relation::Equal, -3);
    lp.add({0, 1}, Relation::GreaterEq, -1);
    const auto r = maximize(lp, {-1, 0});
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_EQ(r.x[0], Rational(-4));
}

TEST(RationalLp, InfeasibleAndUnbounded) {
    LinearProgram lp;
    lp.dim = 1;
    lp.add({1}, Relation::GreaterEq, 1);
    lp.add({1}, Relation::LessEq, 0);
    EXPECT_FALSE(find_feasible(lp).has_value());

    LinearProgram ub;
    ub.dim = 1;
    ub.add({1}, Relation::GreaterEq, 1);
    EXPECT_EQ(maximize(ub, {1}).status, LpStatus::Unbounded);
}

TEST(RationalLp, DegenerateRedundantRows) {
    LinearProgram lp;
    lp.dim = 2;
    lp.add({1, 1}, Relation::Equal, 1);
    lp.add({2, 2}, Relation::Equal, 2);
    lp.add({1, 0}, Relation::GreaterEq, 0);
    lp.add({0, 1}, Relation::GreaterEq, 0);
    const auto r = maximize(lp, {1, 0});
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_EQ(r.value, Rational(1));
}

TEST(RationalLp, ExactDyadicConversion) {
    EXPECT_EQ(to_rational(0.1), Rational(3602879701896397, 36028797018963968));
    EXPECT_THROW((void)to_rational(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST(NullSpace, DuplicatedColumns) {
    // [1 1] x = 0 -> span{(1,-1)}
    const auto N = null_space({{1, 1}}, 2);
    ASSERT_EQ(N.size(), 1u);
    EXPECT_EQ(N[0][0], Rational(1));
    EXPECT_EQ(N[0][1], Rational(-1));
    EXPECT_TRUE(null_space({{1, 0}, {0, 1}}, 2).empty());
    EXPECT_EQ(null_space({}, 3).size(), 3u);
}

TEST(AffineSolver, ParticularSolutionAndConsistency) {
    AffineSolver s({{1, 1, 0}, {0, 0, 1}}, 3);
    EXPECT_EQ(s.rank(), 2u);
    ASSERT_EQ(s.null_basis().size(), 1u);
    const auto x = s.solve({2, 5});
    ASSERT_TRUE(x.has_value());
    EXPECT_DOUBLE_EQ((*x)[0] + (*x)[1], 2.0);
    EXPECT_DOUBLE_EQ((*x)[2], 5.0);

    AffineSolver dep({{1, 1}, {2, 2}}, 2);
    EXPECT_TRUE(dep.solve({1, 2}).has_value());
    EXPECT_FALSE(dep.solve({1, 3}).has_value());
}

}  // namespace
}  // namespace ncdp::linalg
