#pragma once

#include <optional>
#include <vector>

namespace ncdp::linalg {

/// Solution set of R x = r for a fixed matrix R and varying right-hand side.
///
/// The echelon form is computed exactly from the double entries; `solve`
/// then applies the stored row transform in floating point.
class AffineSolver {
public:
    AffineSolver() = default;
    AffineSolver(const std::vector<std::vector<double>>& R, std::size_t cols);

    /// Particular solution with free variables at zero, or nullopt if the
    /// system is inconsistent beyond `tol` (relative to the rhs scale).
    [[nodiscard]] std::optional<std::vector<double>> solve(const std::vector<double>& rhs, double tol = 1e-9) const;

    /// Basis of the null space of R (first nonzero entry positive).
    [[nodiscard]] const std::vector<std::vector<double>>& null_basis() const { return null_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t rank() const { return pivots_.size(); }

private:
    std::size_t cols_ = 0;
    std::size_t rows_ = 0;
    std::vector<std::vector<double>> transform_;  // rows_ x rows_, maps rhs to echelon rhs
    std::vector<std::size_t> pivots_;
    std::vector<std::vector<double>> null_;
};

}  // namespace ncdp::linalg
