#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncdp/ext_real.hpp"

namespace ncdp::efun {

using Matrix = std::vector<std::vector<double>>;  // row-major, rows x cols

class ExtFun;

namespace detail {
struct PartialMinPlan;
}

/// x -> a.x + b
struct Affine {
    std::vector<double> a;
    double b = 0.0;
};

/// x -> lambda * sum_i |x_i|^p, p >= 1
struct PowerCost {
    double lambda = 1.0;
    double p = 2.0;
    std::size_t dim = 1;
};

/// Indicator of {lower <= x <= upper}; bounds may be infinite.
struct IndicatorBox {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Indicator of the cone {x : n.x <= 0 for every normal n}.
struct IndicatorPolyCone {
    Matrix normals;
    std::size_t dim = 1;
};

/// Piecewise-linear interpolation on a strictly increasing grid with linear
/// extrapolation. A right slope of +inf (left slope of -inf) makes the function
/// +inf beyond that end.
struct Sampled1D {
    std::vector<double> x;
    std::vector<double> y;
    double left_slope = 0.0;
    double right_slope = 0.0;
};

/// c -> beta*c for c >= 0, -kappa |c|^gamma / (1 + |c|^gamma) for c < 0.
struct SShapedDisutility {
    double gamma = 2.0;
    double kappa = 1.0;
    double beta = 1.0;
};

struct Sum {
    std::vector<ExtFun> terms;
};

/// x -> factor * f(x), factor > 0.
struct Scaled {
    double factor = 1.0;
    std::shared_ptr<const ExtFun> f;
};

/// x -> f(A x + b)
struct AffinePrecompose {
    std::shared_ptr<const ExtFun> f;
    Matrix A;
    std::vector<double> b;
};

/// x_keep -> inf over the remaining coordinates of f.
struct PartialMin {
    std::shared_ptr<const ExtFun> f;
    std::vector<std::size_t> keep;
};

using Expr = std::variant<Affine, PowerCost, IndicatorBox, IndicatorPolyCone, Sampled1D, SShapedDisutility, Sum,
                          Scaled, AffinePrecompose, PartialMin>;

/// Linear equality a.x = rhs implied by the function's domain.
struct Equality {
    std::vector<double> a;
    double rhs = 0.0;
};

/// Immutable extended-real-valued function on R^dim. Cheap to copy.
class ExtFun {
public:
    ExtFun() = default;

    [[nodiscard]] std::size_t dim() const { return node().dim; }
    [[nodiscard]] bool is_convex() const { return node().convex; }
    [[nodiscard]] const Expr& expr() const { return node().expr; }
    [[nodiscard]] bool valid() const noexcept { return n_ != nullptr; }

    /// Thread-safe; partial minimizations run the section minimizer.
    [[nodiscard]] ExtReal eval(std::span<const double> x) const;
    [[nodiscard]] ExtReal operator()(std::span<const double> x) const { return eval(x); }
    [[nodiscard]] ExtReal operator()(std::initializer_list<double> x) const {
        return eval(std::span<const double>(x.begin(), x.size()));
    }

    /// Equalities every point of the domain satisfies (detected from structure).
    [[nodiscard]] std::vector<Equality> equalities() const;

    [[nodiscard]] std::string describe() const;

    friend ExtFun make(Expr e);

private:
    struct Node {
        Expr expr;
        std::size_t dim = 0;
        bool convex = false;
        std::shared_ptr<const detail::PartialMinPlan> plan;
    };
    [[nodiscard]] const Node& node() const;
    std::shared_ptr<const Node> n_;
};

/// Validates parameters and computes dimension and convexity. Throws InvalidModel.
[[nodiscard]] ExtFun make(Expr e);

[[nodiscard]] ExtFun affine(std::vector<double> a, double b = 0.0);
[[nodiscard]] ExtFun power_cost(double lambda, double p, std::size_t dim = 1);
[[nodiscard]] ExtFun indicator_box(std::vector<double> lower, std::vector<double> upper);
[[nodiscard]] ExtFun indicator_polycone(Matrix normals, std::size_t dim);
[[nodiscard]] ExtFun sampled1d(std::vector<double> x, std::vector<double> y, double left_slope, double right_slope);
[[nodiscard]] ExtFun sshaped(double gamma, double kappa, double beta);
[[nodiscard]] ExtFun sum(std::vector<ExtFun> terms);
[[nodiscard]] ExtFun scaled(double factor, ExtFun f);
[[nodiscard]] ExtFun precompose(ExtFun f, Matrix A, std::vector<double> b);
[[nodiscard]] ExtFun partial_min(ExtFun f, std::vector<std::size_t> keep);

/// Selection x -> x[idx] as a precomposition matrix of size idx.size() x dim.
[[nodiscard]] Matrix selection(std::span<const std::size_t> idx, std::size_t dim);

/// True if f is 1-D based (possibly scaled or precomposed with an affine map to R),
/// convex, or a sum whose horizon rule is exact; such functions satisfy the ray
/// formula h_inf(w) = liminf h(alpha w + wbar)/alpha for every wbar in the domain.
[[nodiscard]] bool satisfies_ray_formula(const ExtFun& f);

/// For a Sum: at most one summand is nonconvex, that summand satisfies the ray
/// formula, and a common domain point was found. Then the horizon of the sum is
/// the sum of the horizons. `reason` receives the failing condition.
[[nodiscard]] bool sum_rule_exact(const ExtFun& f, std::string* reason = nullptr);

/// Heuristic search for a point with f(x) < +inf.
[[nodiscard]] std::optional<std::vector<double>> find_domain_point(const ExtFun& f);

/// JSON layout: {"kind": ..., "params": {...}, "children": [...]}. Infinite
/// numbers are written as the strings "inf" / "-inf".
[[nodiscard]] ExtFun from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const ExtFun& f);

}  // namespace ncdp::efun
