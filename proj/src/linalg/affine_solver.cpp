#include "ncdp/linalg/affine_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ncdp/linalg/rational.hpp"

namespace ncdp::linalg {

AffineSolver::AffineSolver(const std::vector<std::vector<double>>& R, std::size_t cols)
    : cols_(cols), rows_(R.size()) {
    // Row-reduce [R | I] so the right block records the transform.
    RMat aug;
    aug.reserve(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        if (R[i].size() != cols) throw std::invalid_argument("AffineSolver: ragged matrix");
        RVec row(cols + rows_);
        for (std::size_t j = 0; j < cols; ++j) row[j] = to_rational(R[i][j]);
        row[cols + i] = 1;
        aug.push_back(std::move(row));
    }
    // Eliminate only within the first `cols` columns but carry the whole row.
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows_; ++c) {
        std::size_t p = r;
        while (p < rows_ && sgn(aug[p][c]) == 0) ++p;
        if (p == rows_) continue;
        std::swap(aug[p], aug[r]);
        const Rational inv = 1 / aug[r][c];
        for (auto& v : aug[r]) v *= inv;
        for (std::size_t i = 0; i < rows_; ++i) {
            if (i == r || sgn(aug[i][c]) == 0) continue;
            const Rational f = aug[i][c];
            for (std::size_t j = 0; j < cols + rows_; ++j) aug[i][j] -= f * aug[r][j];
        }
        pivots_.push_back(c);
        ++r;
    }
    transform_.assign(rows_, std::vector<double>(rows_));
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < rows_; ++j) transform_[i][j] = aug[i][cols + j].get_d();
    }
    std::vector<bool> is_pivot(cols, false);
    for (auto p : pivots_) is_pivot[p] = true;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        RVec v(cols);
        v[f] = 1;
        for (std::size_t k = 0; k < pivots_.size(); ++k) v[pivots_[k]] = -aug[k][f];
        for (const auto& x : v) {
            if (sgn(x) == 0) continue;
            if (sgn(x) < 0) {
                for (auto& y : v) y = -y;
            }
            break;
        }
        null_.push_back(to_double(v));
    }
}

std::optional<std::vector<double>> AffineSolver::solve(const std::vector<double>& rhs, double tol) const {
    if (rhs.size() != rows_) throw std::invalid_argument("AffineSolver: rhs size mismatch");
    double scale = 1.0;
    for (double v : rhs) scale = std::max(scale, std::abs(v));
    std::vector<double> t(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < rows_; ++j) t[i] += transform_[i][j] * rhs[j];
    }
    for (std::size_t i = pivots_.size(); i < rows_; ++i) {
        if (std::abs(t[i]) > tol * scale) return std::nullopt;
    }
    std::vector<double> x(cols_, 0.0);
    for (std::size_t k = 0; k < pivots_.size(); ++k) x[pivots_[k]] = t[k];
    return x;
}

}  // namespace ncdp::linalg
