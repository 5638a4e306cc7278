#pragma once

#include <cstddef>
#include <vector>

#include "ncdp/dp/problem.hpp"

namespace ncdp::dp {

/// Tensor grid of one node's decision vector.
struct DecisionGrid {
    std::vector<std::vector<double>> axes;
};

struct BruteForceResult {
    ExtReal value = ExtReal::inf();
    AdaptedSequence argmin;
    std::size_t combinations = 0;
};

inline constexpr std::size_t kBruteForceBudget = 10'000'000;

/// Same uniform grid {lo + k (hi-lo)/(m-1)} on every decision coordinate of every node.
[[nodiscard]] std::vector<DecisionGrid> uniform_decision_grids(const Problem& p, double lo, double hi, std::size_t m);

/// Exhaustive minimum of E h over the product of per-node grids (one decision
/// per node). Joint choices are ordered with the root most significant and each
/// node's grid lexicographic; ties keep the smallest joint index, so the result
/// is identical for the parallel and serial kernels. Throws BudgetExceeded when
/// the product exceeds `budget`.
[[nodiscard]] BruteForceResult brute_force(const Problem& p, const std::vector<DecisionGrid>& grids,
                                           bool parallel = true, int threads = 0,
                                           std::size_t budget = kBruteForceBudget);

}  // namespace ncdp::dp
