#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ncdp/ext_real.hpp"

namespace ncdp::dp {

using Objective = std::function<ExtReal(std::span<const double>)>;

/// Tuning for `minimize_section`.
struct SearchConfig {
    int grid_points = 33;        ///< per-axis grid size K, odd so that 0 is a grid point
    double box_start = 1.0;      ///< B_0
    double box_max = 1024.0;     ///< largest half-width tried
    double refine_tol = 1e-6;    ///< final pattern-search step
    double dominance_margin = 1.0;
    int refine_starts = 3;       ///< grid local minima refined when a guide is used
    long max_evaluations = 20'000'000;
};

/// Affine parametrization x = origin + sum_k y_k * basis[k] of the search space.
struct AffineParam {
    std::vector<double> origin;
    std::vector<std::vector<double>> basis;
};

struct SearchResult {
    ExtReal value = ExtReal::inf();
    std::vector<double> argmin;  ///< empty when value is +inf
    double box = 0.0;            ///< half-width at which the search stopped
    long evaluations = 0;
};

/// Global search for min_x f(x), x in R^dim.
///
/// Grid search on [-B, B]^k with B doubling from box_start until every boundary
/// grid value exceeds the incumbent by dominance_margin; then coordinate pattern
/// search (with restoration polls along constraint boundaries) down to refine_tol.
/// Ties go to the lexicographically smallest point.
///
/// If `guide` is given, the grid phase runs on the guide and the best grid local
/// minima are refined on `f`. If `param` is given the search runs over its
/// coefficients y instead of x.
///
/// Returns +inf with empty argmin if no finite value is found up to box_max.
/// Throws SearchBoxExhausted if finite values exist but the boundary never dominates.
[[nodiscard]] SearchResult minimize_section(const Objective& f, std::size_t dim, const SearchConfig& cfg,
                                            const Objective* guide = nullptr,
                                            const AffineParam* param = nullptr);

}  // namespace ncdp::dp
