#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncdp/efun/ext_fun.hpp"
#include "ncdp/linalg/rational.hpp"

namespace ncdp::efun {

/// Symbolic horizon function. When `exact` is false the result is a lower bound
/// of the true horizon (a side condition of the sum rule could not be verified).
struct Horizon {
    ExtFun fn;
    bool exact = true;
    std::vector<std::string> notes;
};

/// Structural horizon rules. Throws HorizonConditionViolated for a partial
/// minimization whose recession condition fails.
[[nodiscard]] Horizon horizon(const ExtFun& f);

struct NumericHorizon {
    ExtReal value = ExtReal::inf();
    bool converged = false;
    bool diverged = false;  ///< ladder increasing without bound; value is +inf
    std::vector<double> ladder;
};

/// Ladder estimate of liminf f(alpha w + wbar)/alpha over alpha = 2^k, k = 0..rungs-1.
/// Converged when the last two rungs agree to 1e-6 (relative, unit floor); the
/// estimate is then the last rung, otherwise the infimum over the ladder tail.
/// Two increasing steps at the end without convergence count as divergence to
/// +inf. With subtract_base the
/// terms are (f(alpha w + wbar) - f(wbar))/alpha, which has the same limit.
[[nodiscard]] NumericHorizon horizon_numeric(const ExtFun& f, std::span<const double> w,
                                             std::span<const double> wbar, bool subtract_base = false,
                                             int rungs = 31);
/// Same ladder for an objective given as a callable.
[[nodiscard]] NumericHorizon horizon_numeric(const std::function<ExtReal(std::span<const double>)>& f,
                                             std::span<const double> w, std::span<const double> wbar,
                                             bool subtract_base = false, int rungs = 31);

/// Polyhedral description of a convex positively homogeneous function:
///   H(x) = inf_u { c.(x,u) + sum_k max_j F_kj.(x,u) : C (x,u) <= 0, E (x,u) = 0 }
/// with u auxiliary variables (from partial minimizations).
struct PolyhedralForm {
    std::size_t dim = 0;
    std::size_t aux = 0;
    linalg::RVec linear;                    // size dim + aux
    std::vector<linalg::RMat> max_terms;    // each a list of forms of size dim + aux
    linalg::RMat cone;                      // rows <= 0
    linalg::RMat eq;                        // rows == 0
};

/// Exact conversion for convex horizon expressions built from the structural rules;
/// nullopt when some piece is nonconvex or not positively homogeneous.
[[nodiscard]] std::optional<PolyhedralForm> polyhedral_form(const ExtFun& h);

/// Incrementally builds one LP over x (shared) plus per-form auxiliaries.
class PolyhedralSystem {
public:
    explicit PolyhedralSystem(std::size_t dim) : dim_(dim) {}

    /// Adds H(x) <= rhs.
    void add_bound(const PolyhedralForm& h, const linalg::Rational& rhs);
    /// Adds a.x (rel) b on x.
    void add_row(const linalg::RVec& a, linalg::Relation rel, const linalg::Rational& b);

    [[nodiscard]] std::optional<linalg::RVec> feasible_x() const;
    [[nodiscard]] std::size_t dim() const { return dim_; }

private:
    struct Row {
        std::vector<std::pair<std::size_t, linalg::Rational>> terms;
        linalg::Relation rel;
        linalg::Rational b;
    };
    std::size_t dim_;
    std::size_t vars_ = 0;  // auxiliaries beyond dim_
    std::vector<Row> rows_;
};

enum class SignVerdict { Certified, Violated, SampledNoViolation };

struct SignCheck {
    SignVerdict verdict = SignVerdict::Certified;
    std::vector<double> counterexample;
    std::string method;
};

/// Linear cone region {x : rows x <= 0}; empty rows means R^n.
struct ConeRegion {
    Matrix rows;
};

/// Is H >= 0 on the region? H should be a horizon function (positively homogeneous).
[[nodiscard]] SignCheck is_nonnegative_on(const ExtFun& H, const ConeRegion& region = {});

/// Is H > 0 on region minus `zero_cone`? With an empty zero_cone the excluded set is {0}.
/// zero_cone rows describe {x : rows x <= 0}.
[[nodiscard]] SignCheck is_positive_off(const ExtFun& H, const ConeRegion& region, const ConeRegion& zero_cone);

}  // namespace ncdp::efun
