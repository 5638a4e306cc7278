#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <gmpxx.h>

namespace ncdp::linalg {

using Rational = mpq_class;
using RVec = std::vector<Rational>;
using RMat = std::vector<RVec>;

/// Exact conversion; every finite double is a dyadic rational.
[[nodiscard]] Rational to_rational(double x);
[[nodiscard]] RVec to_rational(const std::vector<double>& x);
[[nodiscard]] std::vector<double> to_double(const RVec& x);

enum class Relation { LessEq, Equal, GreaterEq };

struct Constraint {
    RVec a;
    Relation rel = Relation::LessEq;
    Rational b;
};

/// Linear constraints over free (sign-unrestricted) real variables.
struct LinearProgram {
    std::size_t dim = 0;
    std::vector<Constraint> rows;

    void add(RVec a, Relation rel, Rational b) { rows.push_back({std::move(a), rel, std::move(b)}); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Rational value;
    RVec x;  ///< primal point (feasible point for Optimal; last vertex for Unbounded)
};

/// Maximizes c.x subject to lp.rows; exact two-phase simplex with Bland's rule.
[[nodiscard]] LpResult maximize(const LinearProgram& lp, const RVec& c);

/// Any point satisfying all rows, or nullopt.
[[nodiscard]] std::optional<RVec> find_feasible(const LinearProgram& lp);

/// Exact basis of {x : A x = 0}; each vector has its first nonzero entry positive.
[[nodiscard]] RMat null_space(const RMat& A, std::size_t cols);

/// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> rref(RMat& A, std::size_t cols);

}  // namespace ncdp::linalg
